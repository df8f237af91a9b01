#pragma once

// Partitions of the unit mass: a decreasing sequence of nonnegative parts
// together with explicit dust = 1 - sum(parts).  Proper mass partitions have
// zero dust; truncated sampler output carries its remainder in `dust` rather
// than being silently renormalized.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace efc {

class MassPartition {
 public:
  MassPartition() : dust_(1.0) {}  // the empty configuration: all mass is dust

  // Parts must already be sorted decreasing and nonnegative; dust is computed
  // as 1 - sum.  A tolerance absorbs float addition error on the simplex
  // boundary.
  explicit MassPartition(std::vector<double> parts, double tol = 1e-9) : parts_(std::move(parts)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i] < 0.0) throw std::domain_error("MassPartition: negative part");
      if (i > 0 && parts_[i] > parts_[i - 1])
        throw std::domain_error("MassPartition: parts must be sorted decreasing");
      sum += parts_[i];
    }
    if (sum > 1.0 + tol) throw std::domain_error("MassPartition: parts sum above 1");
    dust_ = sum >= 1.0 ? 0.0 : 1.0 - sum;
  }

  // Marks a sequence whose total is 1 by construction as proper without
  // renormalizing: float drift in the sum is tolerated, not folded back into
  // the parts or reported as dust.
  static MassPartition proper_from_parts(std::vector<double> parts, double tol = 1e-9) {
    MassPartition mp(std::move(parts), tol);
    if (mp.sum() < 1.0 - tol) throw std::domain_error("MassPartition: parts do not sum to 1");
    mp.dust_ = 0.0;
    return mp;
  }

  const std::vector<double>& parts() const { return parts_; }
  double part(std::size_t i) const { return parts_.at(i); }
  std::size_t size() const { return parts_.size(); }
  double dust() const { return dust_; }
  bool proper() const { return dust_ == 0.0; }

  double sum() const {
    double s = 0.0;
    for (double p : parts_) s += p;
    return s;
  }

 private:
  std::vector<double> parts_;
  double dust_;
};

}  // namespace efc
