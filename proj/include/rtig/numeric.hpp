#pragma once

#include <cstdint>
#include <string>

namespace rtig {

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative precision.
double normal_cdf(double x);

/// log(erfc(z)); finite for every finite z, including z far in the right
/// tail where erfc itself underflows.
double log_erfc(double z);

/// SplitMix64 finalizer. Used to derive independent per-stream seeds from
/// one master seed, so adding a stream never perturbs the others.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

}  // namespace rtig
