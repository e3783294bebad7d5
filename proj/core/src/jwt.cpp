// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/jwt.hpp"

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/crypto.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/param_build.h>

#include <array>
#include <cstring>

#include "esg/errors.hpp"

namespace esg::jwt {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

int alphabet_index(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return 26 + (c - 'a');
  if (c >= '0' && c <= '9') return 52 + (c - '0');
  if (c == '-') return 62;
  if (c == '_') return 63;
  return -1;
}

struct BnDeleter {
  void operator()(BIGNUM* p) const { BN_free(p); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

struct ParamBldDeleter {
  void operator()(OSSL_PARAM_BLD* p) const { OSSL_PARAM_BLD_free(p); }
};

struct ParamDeleter {
  void operator()(OSSL_PARAM* p) const { OSSL_PARAM_free(p); }
};

struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};

struct EcdsaSigDeleter {
  void operator()(ECDSA_SIG* p) const { ECDSA_SIG_free(p); }
};

EvpKey wrap(EVP_PKEY* raw) {
  return EvpKey(raw, [](EVP_PKEY* p) { EVP_PKEY_free(p); });
}

std::string bn_to_bytes(const BIGNUM* bn, int pad_to = 0) {
  const int n = pad_to > 0 ? pad_to : BN_num_bytes(bn);
  std::string out(static_cast<std::size_t>(n), '\0');
  if (pad_to > 0) {
    BN_bn2binpad(bn, reinterpret_cast<unsigned char*>(out.data()), n);
  } else {
    BN_bn2bin(bn, reinterpret_cast<unsigned char*>(out.data()));
  }
  return out;
}

BnPtr bytes_to_bn(const std::string& bytes) {
  return BnPtr(BN_bin2bn(reinterpret_cast<const unsigned char*>(bytes.data()),
                         static_cast<int>(bytes.size()), nullptr));
}

// JWS ES256 signatures are raw r||s (32+32 bytes); OpenSSL wants ASN.1 DER.
std::string raw_ecdsa_to_der(const std::string& raw) {
  if (raw.size() != 64) {
    return {};
  }
  std::unique_ptr<ECDSA_SIG, EcdsaSigDeleter> sig(ECDSA_SIG_new());
  BIGNUM* r = BN_bin2bn(reinterpret_cast<const unsigned char*>(raw.data()), 32, nullptr);
  BIGNUM* s = BN_bin2bn(reinterpret_cast<const unsigned char*>(raw.data()) + 32, 32, nullptr);
  if (!sig || !r || !s || ECDSA_SIG_set0(sig.get(), r, s) != 1) {
    BN_free(r);
    BN_free(s);
    return {};
  }
  int len = i2d_ECDSA_SIG(sig.get(), nullptr);
  if (len <= 0) {
    return {};
  }
  std::string der(static_cast<std::size_t>(len), '\0');
  unsigned char* p = reinterpret_cast<unsigned char*>(der.data());
  i2d_ECDSA_SIG(sig.get(), &p);
  return der;
}

std::string der_ecdsa_to_raw(const std::string& der) {
  const unsigned char* p = reinterpret_cast<const unsigned char*>(der.data());
  std::unique_ptr<ECDSA_SIG, EcdsaSigDeleter> sig(
      d2i_ECDSA_SIG(nullptr, &p, static_cast<long>(der.size())));
  if (!sig) {
    return {};
  }
  const BIGNUM* r = nullptr;
  const BIGNUM* s = nullptr;
  ECDSA_SIG_get0(sig.get(), &r, &s);
  return bn_to_bytes(r, 32) + bn_to_bytes(s, 32);
}

std::string hmac_sha256(const std::string& secret, const std::string& data) {
  std::array<unsigned char, 32> mac{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), secret.data(), static_cast<int>(secret.size()),
            reinterpret_cast<const unsigned char*>(data.data()), data.size(), mac.data(), &len)) {
    throw Error("HMAC computation failed");
  }
  return std::string(reinterpret_cast<char*>(mac.data()), len);
}

std::string digest_sign(EVP_PKEY* pkey, const std::string& data) {
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr, pkey) != 1) {
    throw Error("cannot initialize signing");
  }
  std::size_t len = 0;
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  if (EVP_DigestSign(ctx.get(), nullptr, &len, bytes, data.size()) != 1) {
    throw Error("cannot size signature");
  }
  std::string sig(len, '\0');
  if (EVP_DigestSign(ctx.get(), reinterpret_cast<unsigned char*>(sig.data()), &len, bytes,
                     data.size()) != 1) {
    throw Error("signing failed");
  }
  sig.resize(len);
  return sig;
}

bool digest_verify(EVP_PKEY* pkey, const std::string& data, const std::string& signature) {
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr, pkey) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(),
                          reinterpret_cast<const unsigned char*>(signature.data()),
                          signature.size(),
                          reinterpret_cast<const unsigned char*>(data.data()), data.size()) == 1;
}

std::string get_field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || !it->is_string()) {
    return {};
  }
  return it->get<std::string>();
}

}  // namespace

std::string base64url_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
    i += 3;
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
  } else if (rest == 2) {
    const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
  }
  return out;
}

std::optional<std::string> base64url_decode(std::string_view text) {
  // Tolerate padding, reject embedded junk.
  while (!text.empty() && text.back() == '=') {
    text.remove_suffix(1);
  }
  if (text.size() % 4 == 1) {
    return std::nullopt;
  }
  std::string out;
  out.reserve(text.size() * 3 / 4);
  unsigned acc = 0;
  int bits = 0;
  for (char c : text) {
    const int v = alphabet_index(c);
    if (v < 0) {
      return std::nullopt;
    }
    acc = (acc << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((acc >> bits) & 0xFF);
    }
  }
  return out;
}

std::string_view to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::kHS256:
      return "HS256";
    case Algorithm::kRS256:
      return "RS256";
    case Algorithm::kES256:
      return "ES256";
  }
  return "";
}

std::optional<Algorithm> algorithm_from_string(std::string_view text) {
  if (text == "HS256") return Algorithm::kHS256;
  if (text == "RS256") return Algorithm::kRS256;
  if (text == "ES256") return Algorithm::kES256;
  return std::nullopt;
}

Key Key::hmac(std::string secret, std::string kid) {
  Key key;
  key.kind_ = Kind::kHmac;
  key.secret_ = std::move(secret);
  key.kid_ = std::move(kid);
  return key;
}

Key Key::asymmetric(EvpKey pkey, Kind kind, std::string kid) {
  Key key;
  key.kind_ = kind;
  key.pkey_ = std::move(pkey);
  key.kid_ = std::move(kid);
  return key;
}

bool Key::supports(Algorithm alg) const {
  switch (alg) {
    case Algorithm::kHS256:
      return kind_ == Kind::kHmac;
    case Algorithm::kRS256:
      return kind_ == Kind::kRsa;
    case Algorithm::kES256:
      return kind_ == Kind::kEc;
  }
  return false;
}

EvpKey generate_rsa_key(int bits) {
  EVP_PKEY* raw = EVP_PKEY_Q_keygen(nullptr, nullptr, "RSA", static_cast<size_t>(bits));
  if (!raw) {
    throw Error("RSA key generation failed");
  }
  return wrap(raw);
}

EvpKey generate_ec_p256_key() {
  EVP_PKEY* raw = EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256");
  if (!raw) {
    throw Error("EC key generation failed");
  }
  return wrap(raw);
}

std::optional<DecodedToken> split_token(std::string_view token) {
  const auto dot1 = token.find('.');
  if (dot1 == std::string_view::npos) {
    return std::nullopt;
  }
  const auto dot2 = token.find('.', dot1 + 1);
  if (dot2 == std::string_view::npos || token.find('.', dot2 + 1) != std::string_view::npos) {
    return std::nullopt;
  }
  const auto header_b64 = token.substr(0, dot1);
  const auto payload_b64 = token.substr(dot1 + 1, dot2 - dot1 - 1);
  const auto signature_b64 = token.substr(dot2 + 1);

  auto header_text = base64url_decode(header_b64);
  auto payload_text = base64url_decode(payload_b64);
  auto signature = base64url_decode(signature_b64);
  if (!header_text || !payload_text || !signature) {
    return std::nullopt;
  }
  Json header = Json::parse(*header_text, nullptr, false);
  Json payload = Json::parse(*payload_text, nullptr, false);
  if (header.is_discarded() || payload.is_discarded() || !header.is_object() ||
      !payload.is_object()) {
    return std::nullopt;
  }
  DecodedToken decoded;
  decoded.header = std::move(header);
  decoded.payload = std::move(payload);
  decoded.signing_input = std::string(token.substr(0, dot2));
  decoded.signature = std::move(*signature);
  return decoded;
}

bool verify_signature(const DecodedToken& token, Algorithm alg, const Key& key) {
  if (!key.supports(alg)) {
    return false;
  }
  switch (alg) {
    case Algorithm::kHS256: {
      const std::string expected = hmac_sha256(key.secret(), token.signing_input);
      return expected.size() == token.signature.size() &&
             CRYPTO_memcmp(expected.data(), token.signature.data(), expected.size()) == 0;
    }
    case Algorithm::kRS256:
      return digest_verify(key.pkey(), token.signing_input, token.signature);
    case Algorithm::kES256: {
      const std::string der = raw_ecdsa_to_der(token.signature);
      if (der.empty()) {
        return false;
      }
      return digest_verify(key.pkey(), token.signing_input, der);
    }
  }
  return false;
}

std::string sign_token(const Json& claims, Algorithm alg, const Key& key) {
  if (!key.supports(alg)) {
    throw Error("key does not support the requested algorithm");
  }
  Json header{{"alg", std::string(to_string(alg))}, {"typ", "JWT"}};
  if (!key.kid().empty()) {
    header["kid"] = key.kid();
  }
  const std::string signing_input =
      base64url_encode(header.dump()) + "." + base64url_encode(claims.dump());
  std::string signature;
  switch (alg) {
    case Algorithm::kHS256:
      signature = hmac_sha256(key.secret(), signing_input);
      break;
    case Algorithm::kRS256:
      signature = digest_sign(key.pkey(), signing_input);
      break;
    case Algorithm::kES256:
      signature = der_ecdsa_to_raw(digest_sign(key.pkey(), signing_input));
      if (signature.empty()) {
        throw Error("cannot encode EC signature");
      }
      break;
  }
  return signing_input + "." + base64url_encode(signature);
}

std::optional<Key> key_from_jwk(const Json& jwk) {
  if (!jwk.is_object()) {
    return std::nullopt;
  }
  const std::string kty = get_field(jwk, "kty");
  const std::string kid = get_field(jwk, "kid");
  if (kty == "oct") {
    auto secret = base64url_decode(get_field(jwk, "k"));
    if (!secret) {
      return std::nullopt;
    }
    return Key::hmac(std::move(*secret), kid);
  }
  if (kty == "RSA") {
    auto n_bytes = base64url_decode(get_field(jwk, "n"));
    auto e_bytes = base64url_decode(get_field(jwk, "e"));
    if (!n_bytes || !e_bytes || n_bytes->empty() || e_bytes->empty()) {
      return std::nullopt;
    }
    BnPtr n = bytes_to_bn(*n_bytes);
    BnPtr e = bytes_to_bn(*e_bytes);
    std::unique_ptr<OSSL_PARAM_BLD, ParamBldDeleter> bld(OSSL_PARAM_BLD_new());
    if (!n || !e || !bld ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_N, n.get()) != 1 ||
        OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_RSA_E, e.get()) != 1) {
      return std::nullopt;
    }
    std::unique_ptr<OSSL_PARAM, ParamDeleter> params(OSSL_PARAM_BLD_to_param(bld.get()));
    std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> ctx(
        EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr));
    EVP_PKEY* raw = nullptr;
    if (!params || !ctx || EVP_PKEY_fromdata_init(ctx.get()) != 1 ||
        EVP_PKEY_fromdata(ctx.get(), &raw, EVP_PKEY_PUBLIC_KEY, params.get()) != 1) {
      return std::nullopt;
    }
    return Key::asymmetric(wrap(raw), Key::Kind::kRsa, kid);
  }
  if (kty == "EC") {
    if (get_field(jwk, "crv") != "P-256") {
      return std::nullopt;
    }
    auto x = base64url_decode(get_field(jwk, "x"));
    auto y = base64url_decode(get_field(jwk, "y"));
    if (!x || !y || x->size() != 32 || y->size() != 32) {
      return std::nullopt;
    }
    std::string point = std::string(1, '\x04') + *x + *y;
    std::unique_ptr<OSSL_PARAM_BLD, ParamBldDeleter> bld(OSSL_PARAM_BLD_new());
    if (!bld ||
        OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, "prime256v1",
                                        0) != 1 ||
        OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, point.data(),
                                         point.size()) != 1) {
      return std::nullopt;
    }
    std::unique_ptr<OSSL_PARAM, ParamDeleter> params(OSSL_PARAM_BLD_to_param(bld.get()));
    std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> ctx(
        EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
    EVP_PKEY* raw = nullptr;
    if (!params || !ctx || EVP_PKEY_fromdata_init(ctx.get()) != 1 ||
        EVP_PKEY_fromdata(ctx.get(), &raw, EVP_PKEY_PUBLIC_KEY, params.get()) != 1) {
      return std::nullopt;
    }
    return Key::asymmetric(wrap(raw), Key::Kind::kEc, kid);
  }
  return std::nullopt;
}

std::vector<Key> keys_from_jwks(const Json& jwks_document) {
  std::vector<Key> keys;
  if (!jwks_document.is_object()) {
    return keys;
  }
  auto it = jwks_document.find("keys");
  if (it == jwks_document.end() || !it->is_array()) {
    return keys;
  }
  for (const auto& jwk : *it) {
    if (auto key = key_from_jwk(jwk)) {
      keys.push_back(std::move(*key));
    }
  }
  return keys;
}

Json public_jwk(const Key& key) {
  Json jwk = Json::object();
  switch (key.kind()) {
    case Key::Kind::kHmac:
      jwk["kty"] = "oct";
      jwk["k"] = base64url_encode(key.secret());
      break;
    case Key::Kind::kRsa: {
      BIGNUM* n = nullptr;
      BIGNUM* e = nullptr;
      if (EVP_PKEY_get_bn_param(key.pkey(), OSSL_PKEY_PARAM_RSA_N, &n) != 1 ||
          EVP_PKEY_get_bn_param(key.pkey(), OSSL_PKEY_PARAM_RSA_E, &e) != 1) {
        BN_free(n);
        throw Error("cannot export RSA public key");
      }
      BnPtr n_owner(n), e_owner(e);
      jwk["kty"] = "RSA";
      jwk["n"] = base64url_encode(bn_to_bytes(n));
      jwk["e"] = base64url_encode(bn_to_bytes(e));
      break;
    }
    case Key::Kind::kEc: {
      BIGNUM* x = nullptr;
      BIGNUM* y = nullptr;
      if (EVP_PKEY_get_bn_param(key.pkey(), OSSL_PKEY_PARAM_EC_PUB_X, &x) != 1 ||
          EVP_PKEY_get_bn_param(key.pkey(), OSSL_PKEY_PARAM_EC_PUB_Y, &y) != 1) {
        BN_free(x);
        throw Error("cannot export EC public key");
      }
      BnPtr x_owner(x), y_owner(y);
      jwk["kty"] = "EC";
      jwk["crv"] = "P-256";
      jwk["x"] = base64url_encode(bn_to_bytes(x, 32));
      jwk["y"] = base64url_encode(bn_to_bytes(y, 32));
      break;
    }
  }
  if (!key.kid().empty()) {
    jwk["kid"] = key.kid();
  }
  jwk["use"] = "sig";
  return jwk;
}

}  // namespace esg::jwt
