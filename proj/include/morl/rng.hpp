#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace morl {

// Counter-free splittable RNG. A stream is identified by (seed, label); child
// streams are derived by hashing a label into the parent seed, so concurrent
// tasks each own an independent stream and sweep outputs do not depend on the
// number of workers.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string label);

  /// Derive an independent child stream. Does not advance this stream.
  RngStream child(const std::string& label) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal draw (Box-Muller, one cached spare).
  double normal();

  std::vector<double> normal_vec(std::size_t n);

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace morl
