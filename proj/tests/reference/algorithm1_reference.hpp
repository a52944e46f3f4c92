#pragma once

// Straight-line transcription of the modified discrepancy principle with
// estimated data error, written against the raw n x m measurement matrix with
// plain loops and no library helpers. Used as an independent oracle.

#include <algorithm>
#include <cmath>
#include <vector>

namespace reference {

// rows[i][j] = (Y_i, u_j); sigma nonincreasing. Returns the stopping index k.
inline long algorithm1_k(const std::vector<std::vector<double>>& rows, const std::vector<double>& sigma, double eps1,
                         double eps2) {
  const long n = static_cast<long>(rows.size());
  const long m = static_cast<long>(sigma.size());

  // 1: number of components
  long m_n = static_cast<long>(std::floor(std::pow(static_cast<double>(n), 1.0 - eps1)));
  if (m_n > m) m_n = m;

  // 2-3: sample means and variances
  std::vector<double> ybar(m_n, 0.0), s2(m_n, 0.0);
  for (long j = 0; j < m_n; ++j) {
    double sum = 0.0;
    for (long i = 0; i < n; ++i) sum += rows[i][j];
    ybar[j] = sum / static_cast<double>(n);
    double sq = 0.0;
    for (long i = 0; i < n; ++i) sq += (rows[i][j] - ybar[j]) * (rows[i][j] - ybar[j]);
    s2[j] = sq / static_cast<double>(n - 1);
  }

  // 4-8: weights
  double total = 0.0;
  for (long j = 0; j < m_n; ++j) total += s2[j];
  std::vector<double> d2(m_n, 0.0);
  for (long j = 0; j < m_n; ++j) {
    const double jj = static_cast<double>(j + 1);
    if (j == 0) {
      const double first = s2[0] > 0.0 ? total / s2[0] : INFINITY;
      d2[j] = std::min(first, 1.0 / (sigma[0] * sigma[0]));
    } else {
      const double first = s2[j] > 0.0 ? std::pow(jj, -(1.0 + eps2)) * total / s2[j] : INFINITY;
      d2[j] = std::min(first, sigma[j - 1] * sigma[j - 1] / (sigma[j] * sigma[j]) * d2[j - 1]);
    }
  }

  // 10: rescaled noise level
  double level = 0.0;
  for (long j = 0; j < m_n; ++j) level += d2[j] * s2[j];
  const double delta_prime = std::sqrt(level / static_cast<double>(n));

  // 11-16: discrepancy loop on the rescaled data
  long k = 0;
  while (true) {
    double tail = 0.0;
    for (long j = k; j < m_n; ++j) tail += d2[j] * ybar[j] * ybar[j];
    if (!(std::sqrt(tail) > delta_prime)) break;
    ++k;
  }
  return k;
}

}  // namespace reference
