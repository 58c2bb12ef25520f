#include "toolbench/stream.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace toolbench {

namespace {

void put_le64(unsigned char* out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

}  // namespace

uint64_t SeededStream::next_u64() {
  unsigned char msg[18];
  std::string buf;
  buf.reserve(18 + label_.size());
  put_le64(msg, seed_);
  buf.append(reinterpret_cast<char*>(msg), 8);
  buf.push_back('\0');
  buf.append(label_);
  buf.push_back('\0');
  put_le64(msg, counter_);
  buf.append(reinterpret_cast<char*>(msg), 8);

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(buf.data(), buf.size(), digest, &len, EVP_sha256(),
                  nullptr)) {
    throw std::runtime_error("SeededStream: digest failure");
  }
  ++counter_;
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | digest[i];
  return v;
}

double SeededStream::next_unit() {
  return static_cast<double>(next_u64()) / 18446744073709551616.0;  // 2^64
}

uint64_t SeededStream::next_below(uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n must be positive");
  return next_u64() % n;
}

}  // namespace toolbench
