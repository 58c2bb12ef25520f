#include "toolbench/canonical.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace toolbench {

std::string canonical_bytes(const Json& value) {
  if (value.is_discarded()) {
    throw std::invalid_argument("canonical_bytes: value is not serializable");
  }
  return value.dump();
}

Json parse_json(std::string_view bytes) {
  return Json::parse(bytes);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                  nullptr)) {
    throw std::runtime_error("sha256: digest failure");
  }
  static const char* hexdig = "0123456789abcdef";
  std::string out(static_cast<size_t>(len) * 2, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = hexdig[digest[i] >> 4];
    out[2 * i + 1] = hexdig[digest[i] & 0xf];
  }
  return out;
}

}  // namespace toolbench
