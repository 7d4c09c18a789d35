#pragma once
// Actual and virtual queues with the outage-aware service rule.

#include <vector>

#include "jtcomp/rng.hpp"

namespace jtcomp {

// Fixed-capacity 0/1 history ring; push drops the oldest entry beyond the
// averaging window.
class OutageRing {
 public:
  explicit OutageRing(int capacity) : capacity_(capacity) {}

  void push(bool outage) {
    if (static_cast<int>(buf_.size()) == capacity_) {
      buf_.erase(buf_.begin());
    }
    buf_.push_back(outage ? 1 : 0);
  }
  int size() const { return static_cast<int>(buf_.size()); }
  int capacity() const { return capacity_; }
  double mean() const {
    if (buf_.empty()) return 0.0;
    double s = 0.0;
    for (auto v : buf_) s += v;
    return s / buf_.size();
  }

 private:
  int capacity_;
  std::vector<unsigned char> buf_;
};

struct QueueState {
  std::vector<double> q_bits;          // Q_k
  std::vector<double> z_bits;          // Z_k
  std::vector<double> arrivals;        // A_k of the current slot
  std::vector<OutageRing> outage_hist;

  QueueState(int users, int window)
      : q_bits(users, 0.0), z_bits(users, 0.0), arrivals(users, 0.0) {
    outage_hist.assign(users, OutageRing(window));
  }
};

// Independent Poisson(lambda) integer arrivals per user.
std::vector<double> draw_arrivals(double lambda, int users, Rng& stream);

struct QueueUpdate {
  double q_next = 0.0;
  bool outage = false;
};

// Service succeeds only when the assigned rate is supported by the realized
// channel; a failed nonzero transmission leaves the queue unserved and
// raises the outage flag.
QueueUpdate update_queue(double q, double rate, double supported_rate, double arrivals);

// Z' = max(0, Z + Q_next - eps * Q_th)
double update_virtual(double z, double q_next, double eps, double q_threshold);

// Per-slot weight w_k = Q + A + Z.
double slot_weight(double q, double a, double z);

}  // namespace jtcomp
