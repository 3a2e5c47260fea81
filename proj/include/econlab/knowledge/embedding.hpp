#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace econlab::knowledge {

inline constexpr std::size_t kDefaultDimension = 768;

/// Text -> fixed-dimension vector. Implementations must be safe to call from several
/// threads at once.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const noexcept = 0;
  virtual std::string name() const = 0;
  virtual std::vector<float> embed(std::string_view text) const = 0;
};

/// Offline pseudo-embedder: lowercased alphanumeric tokens (and their bigrams) are hashed
/// into signed buckets, then the vector is unit-normalized. Texts sharing vocabulary get
/// positive cosine. Deterministic in (seed, text).
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = kDefaultDimension, std::uint64_t seed = 0);

  std::size_t dimension() const noexcept override { return dim_; }
  std::string name() const override;
  std::vector<float> embed(std::string_view text) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// u.v / (|u||v|). Throws std::invalid_argument on dimension mismatch or a zero-norm input.
double cosine(std::span<const float> u, std::span<const float> v);

/// Lowercased runs of ASCII letters/digits; non-ASCII bytes are kept inside tokens.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace econlab::knowledge
