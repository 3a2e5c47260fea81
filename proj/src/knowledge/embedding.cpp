#include "econlab/knowledge/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "econlab/econ/rng.hpp"

namespace econlab::knowledge {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr int kBucketsPerFeature = 2;

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    const bool word = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (word) {
      cur.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed) : dim_(dimension), seed_(seed) {
  if (dimension == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::string HashEmbedder::name() const { return "hash-v1/seed=" + std::to_string(seed_); }

std::vector<float> HashEmbedder::embed(std::string_view text) const {
  std::vector<double> acc(dim_, 0.0);
  auto add = [&](std::string_view feature, double weight) {
    econ::SplitMix64 mix(fnv1a(feature) ^ seed_);
    for (int b = 0; b < kBucketsPerFeature; ++b) {
      const std::uint64_t r = mix();
      acc[r % dim_] += (r >> 63) ? weight : -weight;
    }
  };
  const auto tokens = tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(tokens[i], 1.0);
    if (i + 1 < tokens.size()) add(tokens[i] + ' ' + tokens[i + 1], 0.5);
  }
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  if (norm == 0.0) {
    // No tokens, or every bucket cancelled: fall back to one bucket keyed by the raw text.
    acc.assign(dim_, 0.0);
    acc[fnv1a(text) % dim_] = 1.0;
    norm = 1.0;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("zero-norm vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace econlab::knowledge
