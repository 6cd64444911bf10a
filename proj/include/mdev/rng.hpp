#pragma once

#include <cstdint>
#include <random>
#include <Eigen/Dense>

namespace mdev {

// Splittable stream keyed by (master_seed, chunk_index). Equal keys give
// identical sequences; distinct chunk indices give statistically
// independent streams, so results never depend on how work is sharded
// across workers.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t chunk_index = 0)
      : master_seed_(master_seed), chunk_index_(chunk_index) {
    std::uint64_t s = mix(master_seed ^ mix(chunk_index + 0x9e3779b97f4a7c15ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(s),
                      static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(mix(s)),
                      static_cast<std::uint32_t>(mix(s) >> 32)};
    gen_.seed(seq);
  }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t chunk_index() const { return chunk_index_; }

  // Independent substream; used to shard Monte Carlo work into chunks.
  RngStream child(std::uint64_t i) const {
    return RngStream(master_seed_, mix(chunk_index_ ^ mix(i + 1)));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on (0,1), never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd normal_vector(int d) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z[i] = normal();
    return z;
  }

  // Uniform direction on the unit sphere in R^d.
  Eigen::VectorXd unit_vector(int d) {
    Eigen::VectorXd z = normal_vector(d);
    double n = z.norm();
    while (n < 1e-300) {
      z = normal_vector(d);
      n = z.norm();
    }
    return z / n;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t master_seed_;
  std::uint64_t chunk_index_;
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Worker cap for chunked Monte Carlo loops. Never affects results, only
// wall time: chunks are reduced in fixed index order.
int max_threads();
void set_max_threads(int n);

}  // namespace mdev
