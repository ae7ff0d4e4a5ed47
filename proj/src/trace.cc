#include "distq/trace.h"

#include <algorithm>

namespace distq {

double RunTrace::max_fro_norm() const {
  double best = 0.0;
  for (const auto& r : rounds) {
    for (const auto& s : r.sensors) best = std::max(best, s.fro_norm);
  }
  return best;
}

QFactor RunTrace::mean_final() const {
  return QFactor(mean_of(final_estimates), final_estimates.front().n());
}

double entrywise_norm1(const Eigen::MatrixXd& M) { return M.cwiseAbs().sum(); }

double consensus_diameter(std::span<const QFactor> estimates) {
  double diameter = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    for (std::size_t j = i + 1; j < estimates.size(); ++j) {
      diameter = std::max(diameter, (estimates[i].matrix() - estimates[j].matrix()).norm());
    }
  }
  return diameter;
}

Eigen::MatrixXd mean_of(std::span<const QFactor> estimates) {
  Eigen::MatrixXd sum = estimates.front().matrix();
  for (std::size_t i = 1; i < estimates.size(); ++i) sum += estimates[i].matrix();
  if (estimates.size() == 1) return sum;
  return sum / static_cast<double>(estimates.size());
}

RoundRecord make_round_record(std::size_t k, double alpha, std::span<const double> omegas,
                              std::span<const QFactor> estimates, bool distributed,
                              const QFactor* oracle_G) {
  RoundRecord rec;
  rec.k = k;
  rec.alpha = alpha;
  rec.sensors.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    SensorRecord s;
    s.omega = omegas.size() == 1 ? omegas[0] : omegas[i];
    s.norm1 = entrywise_norm1(estimates[i].matrix());
    s.fro_norm = estimates[i].matrix().norm();
    if (oracle_G != nullptr) s.err_to_oracle = (estimates[i].matrix() - oracle_G->matrix()).norm();
    rec.sensors.push_back(s);
  }
  if (distributed) rec.consensus_diameter = consensus_diameter(estimates);
  rec.mean_iterate = mean_of(estimates);
  if (oracle_G != nullptr) rec.mean_err_to_oracle = (rec.mean_iterate - oracle_G->matrix()).norm();
  return rec;
}

}  // namespace distq
