#include "pwgf/harness/csv.hpp"

#include <cstdio>

namespace pwgf::harness {

std::string format_real(double x) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.6g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_curve_csv(std::ostream& out, const LearningCurve& curve) {
  out << kCurveHeader << '\n';
  for (const auto& row : curve) {
    out << row.seed << ',' << row.epoch << ',' << to_string(row.estimator) << ',' << format_real(row.param) << ','
        << format_real(row.gen_objective) << ',' << format_real(row.disc_loss) << '\n';
  }
}

void write_variance_csv(std::ostream& out, const std::vector<VarianceRow>& rows) {
  out << kVarianceHeader << '\n';
  for (const auto& row : rows) {
    out << to_string(row.estimator) << ',' << row.count << ',' << format_real(row.mean) << ','
        << format_real(row.exact) << ',' << format_real(row.bias) << ',' << format_real(row.std) << '\n';
  }
}

}  // namespace pwgf::harness
