#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace otp {

// Labelings are arbitrary integer class ids; `truth` and `predicted` must
// have the same nonzero length.

double accuracy(std::span<const int> truth, std::span<const int> predicted);

/// 2 I(Y, Yhat) / (H(Y) + H(Yhat)) with natural logs. Both partitions
/// trivial gives 1; exactly one trivial gives 0.
double nmi(std::span<const int> truth, std::span<const int> predicted);

/// Hubert-Arabie adjusted Rand index. Requires n >= 2; a zero denominator
/// (both partitions trivial in the same way) gives 1.
double ari(std::span<const int> truth, std::span<const int> predicted);

/// SCORE(A) = sum over datasets D of Perf(A, D) / max_A' Perf(A', D).
/// Every algorithm must have one strictly positive value per dataset.
std::map<std::string, double> score_measure(const std::map<std::string, std::vector<double>>& performance);

}  // namespace otp
