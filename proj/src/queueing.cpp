#include "jtcomp/queueing.hpp"

#include <algorithm>
#include <stdexcept>

namespace jtcomp {

std::vector<double> draw_arrivals(double lambda, int users, Rng& stream) {
  if (lambda < 0.0) throw std::invalid_argument("draw_arrivals: lambda must be >= 0");
  std::vector<double> a(users);
  for (int k = 0; k < users; ++k) {
    a[k] = static_cast<double>(stream.poisson(lambda));
  }
  return a;
}

QueueUpdate update_queue(double q, double rate, double supported_rate, double arrivals) {
  QueueUpdate out;
  const double served = (rate <= supported_rate) ? rate : 0.0;
  out.q_next = std::max(0.0, q - served + arrivals);
  out.outage = rate > 0.0 && rate > supported_rate;
  return out;
}

double update_virtual(double z, double q_next, double eps, double q_threshold) {
  return std::max(0.0, z + q_next - eps * q_threshold);
}

double slot_weight(double q, double a, double z) { return q + a + z; }

}  // namespace jtcomp
