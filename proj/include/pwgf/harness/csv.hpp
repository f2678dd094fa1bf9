#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "pwgf/harness/experiments.hpp"

namespace pwgf::harness {

inline constexpr const char* kCurveHeader = "seed,epoch,estimator,param,gen_objective,disc_loss";
inline constexpr const char* kVarianceHeader = "estimator,count,mean,exact,bias,std";

/// Six significant digits, C locale.
std::string format_real(double x);

void write_curve_csv(std::ostream& out, const LearningCurve& curve);
void write_variance_csv(std::ostream& out, const std::vector<VarianceRow>& rows);

}  // namespace pwgf::harness
