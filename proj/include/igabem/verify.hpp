#pragma once

#include <string>
#include <vector>

#include "igabem/oracles.hpp"

namespace igabem {

struct VerifyOptions {
  // Negative-control hook: scales the kernel constant C seen by the analytic
  // bar integrals only, never by the references.
  double kernel_constant_scale = 1.0;
  unsigned seed = 2024;
};

// Individual checks, each comparing production code against an oracle.
OracleReport check_closed_box(unsigned seed);
OracleReport check_bar_regular(const VerifyOptions& o, int configurations = 200);
OracleReport check_bar_singular(const VerifyOptions& o);
OracleReport check_bar_structure();
OracleReport check_kernel_fd(unsigned seed, int pairs = 100);
OracleReport check_kernel_symmetry(unsigned seed);
OracleReport check_patch_test();
OracleReport check_strain_recovery(unsigned seed);
OracleReport check_singular_volume();

/// All checks in a fixed order.
std::vector<OracleReport> run_verification(const VerifyOptions& o = {});

}  // namespace igabem
