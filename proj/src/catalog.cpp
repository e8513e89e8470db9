#include "dhn/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "dhn/types.hpp"

namespace dhn {

double PipeCatalog::min_interval() const {
  double best = diameters[0] - void_diameter;
  for (size_t k = 1; k < diameters.size(); ++k)
    best = std::min(best, diameters[k] - diameters[k - 1]);
  return best;
}

double PipeCatalog::smoothed_offset(double d) const {
  // Shifted logistic: 0 at fade_d_min, -> cost_offset for d >> fade_d_min.
  double s = 2.0 / (1.0 + std::exp(-fade_steepness * (d - fade_d_min))) - 1.0;
  return cost_offset * s;
}

double PipeCatalog::smoothed_offset_d(double d) const {
  double e = std::exp(-fade_steepness * (d - fade_d_min));
  double denom = (1.0 + e) * (1.0 + e);
  return cost_offset * 2.0 * fade_steepness * e / denom;
}

double PipeCatalog::snap(double d) const {
  double best = void_diameter;
  double err = std::abs(d - void_diameter);
  for (double dk : diameters) {
    if (std::abs(d - dk) < err) {
      err = std::abs(d - dk);
      best = dk;
    }
  }
  return best;
}

double PipeCatalog::round_up(double d, double keep_fraction) const {
  if (d <= void_diameter + keep_fraction * (diameters[0] - void_diameter))
    return void_diameter;
  for (double dk : diameters)
    if (dk >= d) return dk;
  return diameters.back();
}

void catalog_fit(PipeCatalog& catalog) {
  size_t n = catalog.diameters.size();
  if (n < 2)
    throw ValidationError("catalog: need at least two diameter entries");
  if (catalog.costs.size() != n)
    throw ValidationError("catalog: diameters and costs differ in length");
  for (size_t k = 0; k + 1 < n; ++k)
    if (catalog.diameters[k + 1] <= catalog.diameters[k])
      throw ValidationError("catalog: diameters must be strictly increasing");
  if (catalog.void_diameter <= 0.0 ||
      catalog.void_diameter >= catalog.diameters.front())
    throw ValidationError(
        "catalog: void_diameter must lie in (0, first diameter)");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < n; ++k) {
    sx += catalog.diameters[k];
    sy += catalog.costs[k];
    sxx += catalog.diameters[k] * catalog.diameters[k];
    sxy += catalog.diameters[k] * catalog.costs[k];
  }
  double den = n * sxx - sx * sx;
  catalog.cost_slope = (n * sxy - sx * sy) / den;
  catalog.cost_offset = (sy * sxx - sx * sxy) / den;
}

}  // namespace dhn
