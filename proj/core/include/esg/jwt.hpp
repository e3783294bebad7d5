// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esg/json.hpp"

typedef struct evp_pkey_st EVP_PKEY;

namespace esg::jwt {

// URL-safe base64 without padding, as JWS uses it.
std::string base64url_encode(std::string_view bytes);
std::optional<std::string> base64url_decode(std::string_view text);

enum class Algorithm { kHS256, kRS256, kES256 };

std::string_view to_string(Algorithm alg);
std::optional<Algorithm> algorithm_from_string(std::string_view text);

using EvpKey = std::shared_ptr<EVP_PKEY>;

// One verification (or signing) key. HMAC keys carry the shared secret;
// RSA/EC keys carry an OpenSSL key handle, public or private.
class Key {
 public:
  enum class Kind { kHmac, kRsa, kEc };

  static Key hmac(std::string secret, std::string kid = "");
  static Key asymmetric(EvpKey pkey, Kind kind, std::string kid = "");

  Kind kind() const { return kind_; }
  const std::string& kid() const { return kid_; }
  const std::string& secret() const { return secret_; }
  EVP_PKEY* pkey() const { return pkey_.get(); }

  bool supports(Algorithm alg) const;

 private:
  Kind kind_ = Kind::kHmac;
  std::string kid_;
  std::string secret_;
  EvpKey pkey_;
};

// Key generation, for test fixtures and local token minting.
EvpKey generate_rsa_key(int bits = 2048);
EvpKey generate_ec_p256_key();

// Token text split into its three parts, signature already decoded.
struct DecodedToken {
  Json header;
  Json payload;
  std::string signing_input;  // "<b64 header>.<b64 payload>"
  std::string signature;      // raw bytes
};

std::optional<DecodedToken> split_token(std::string_view token);

// Signature check only; claim checks are the caller's job. ES256 signatures
// are the JWS raw r||s form.
bool verify_signature(const DecodedToken& token, Algorithm alg, const Key& key);

// Builds a signed token with header {"alg", "typ":"JWT" [, "kid"]}. The kid
// header is taken from the key when set. Throws Error on signing failure.
std::string sign_token(const Json& claims, Algorithm alg, const Key& key);

// JWK conversions. key_from_jwk understands kty RSA (n, e), EC P-256 (x, y)
// and oct (k); returns nullopt for anything else.
std::optional<Key> key_from_jwk(const Json& jwk);
std::vector<Key> keys_from_jwks(const Json& jwks_document);
Json public_jwk(const Key& key);  // public members only; oct keys export k

}  // namespace esg::jwt
