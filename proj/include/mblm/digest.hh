#ifndef MBLM_DIGEST_HH
#define MBLM_DIGEST_HH

#include <filesystem>
#include <memory>
#include <span>
#include <string>

#include "mblm/model.hh"

namespace mblm {

// Incremental SHA-256, used for the corpus digest stored in model files.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256 &) = delete;
  Sha256 &operator=(const Sha256 &) = delete;

  void update(std::span<const std::uint8_t> bytes);
  void update_file(const std::filesystem::path &path);
  Digest finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Digest sha256(std::span<const std::uint8_t> bytes);

// Digest of the concatenated contents of the given files.
Digest digest_files(std::span<const std::filesystem::path> paths);

// Continuation digest: H(previous || H(new input)).
Digest chain_digest(const Digest &previous, const Digest &addition);

std::string to_hex(const Digest &d);

}  // namespace mblm

#endif  // MBLM_DIGEST_HH
