#ifndef CHM_OPTIMIZE_HPP
#define CHM_OPTIMIZE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace chm {

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex minimization (standard reflect/expand/contract
// coefficients). `steps` sets the initial simplex edge per coordinate.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, std::vector<double> steps,
                                    int max_iter = 400, double ftol = 1e-12) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  NelderMeadResult res;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<std::size_t> order(n + 1);
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];

    if (std::abs(fv[worst] - fv[best]) <=
        ftol * (std::abs(fv[best]) + std::abs(fv[worst]) + 1e-300)) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + coef * (pts[worst][d] - centroid[d]);
      return p;
    };

    std::vector<double> refl = blend(-1.0);
    const double f_refl = f(refl);
    if (f_refl < fv[order[0]]) {
      std::vector<double> expo = blend(-2.0);
      const double f_expo = f(expo);
      if (f_expo < f_refl) {
        pts[worst] = expo;
        fv[worst] = f_expo;
      } else {
        pts[worst] = refl;
        fv[worst] = f_refl;
      }
    } else if (f_refl < fv[second]) {
      pts[worst] = refl;
      fv[worst] = f_refl;
    } else {
      std::vector<double> contr = blend(f_refl < fv[worst] ? -0.5 : 0.5);
      const double f_contr = f(contr);
      if (f_contr < std::min(f_refl, fv[worst])) {
        pts[worst] = contr;
        fv[worst] = f_contr;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < n; ++d) pts[i][d] = 0.5 * (pts[i][d] + pts[best][d]);
          fv[i] = f(pts[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  res.x = pts[best];
  res.value = fv[best];
  res.iterations = it;
  return res;
}

}  // namespace chm

#endif
