#pragma once

#include <string>
#include <vector>

#include "sdcalc/process_model.hpp"

namespace sdcalc {

// Named process and function specs for the CLI and config files.
//
// X names : const:<v>, linear_t, cos_t_times_B, B_itself, scale_B:<a>,
//           self, indicator_Bpos, step:<t0>, sin2pi_t
// V names : zero, neg_t, pos_t, t_squared
// f names : identity, power:<p>, abs, exp, cubic, affine:<a>,<b>, relu
ProcessSpec make_x_spec(const std::string& name);
ProcessSpec make_v_spec(const std::string& name);
FunctionSpec make_f_spec(const std::string& name);

std::vector<std::string> x_spec_names();
std::vector<std::string> v_spec_names();
std::vector<std::string> f_spec_names();

// Stable rule identifiers for CLI and CSV output.
std::vector<std::string> rule_names();
bool is_rule_name(const std::string& name);

}  // namespace sdcalc
