#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace semvia::cli {

enum ExitCode : int { kOk = 0, kValidationFailed = 1, kInvalidInput = 2 };

// CSV headers; column order is part of the interface.
inline constexpr std::string_view kAnalyticHeader = "policy,metric,value";
inline constexpr std::string_view kSimulateHeader = "policy,metric,mean,stderr,slots,replications";
inline constexpr std::string_view kTraceHeader = "t,x,xhat,sampled,delivered,via,aoiv,aoii";
inline constexpr std::string_view kValidateHeader =
    "p,q,p_s,policy,metric,check,closed_form,observed,abs_diff,tolerance,status";
inline constexpr std::string_view kOptimizeHeader =
    "family,objective,feasible,p_a,q1,q2,objective_value,cost_rate,p_e,cost_binding,"
    "error_binding,degenerate,note";
inline constexpr std::string_view kTablesHeader =
    "block,p_s,q,p,objective,family,feasible,p_a,q1,q2,objective_value,cost_rate";
inline constexpr std::string_view kSweepHeader =
    "sweep_var,value,policy,metric,analytic,simulated,stderr,cost,feasible";

/// Entry point behind the semvia binary. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semvia::cli
