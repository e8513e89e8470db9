#pragma once

#include <vector>

namespace dhn {

// Discrete pipe series plus the fitted continuous cost model used between
// catalog points.  Costs are totals per trench metre (pipe pair).
struct PipeCatalog {
  std::vector<double> diameters;  // m, strictly increasing, >= 2 entries
  std::vector<double> costs;      // EUR/m, same length

  // Sentinel below the smallest diameter that marks a removed pipe.  Kept
  // small but positive so the flow model stays defined on the whole box.
  double void_diameter = 1e-3;  // m

  // Fitted linear cost c(d) ~ cost_slope * d + cost_offset, with the offset
  // faded in around fade_d_min so removed pipes carry no fixed cost.
  double cost_slope = 0.0;        // EUR/m^2
  double cost_offset = 0.0;       // EUR/m
  double fade_d_min = 1e-3;       // m, centre of the fixed-cost fade
  double fade_steepness = 600.0;  // 1/m

  double d_min() const { return void_diameter; }
  double d_max() const { return diameters.back(); }
  int intervals() const { return static_cast<int>(diameters.size()); }

  // Breakpoint k of the penalization grid: void_diameter, then the catalog.
  double grid(int k) const {
    return k == 0 ? void_diameter : diameters[k - 1];
  }
  double min_interval() const;

  // Fixed cost smoothly switched off below fade_d_min.
  double smoothed_offset(double d) const;
  double smoothed_offset_d(double d) const;

  // Nearest catalog diameter; diameters closer to void_diameter than to the
  // first catalog entry snap to void_diameter (pipe removed).
  double snap(double d) const;
  // Smallest catalog diameter >= d; diameters within keep_fraction of the
  // first interval above void_diameter are treated as removed instead.
  double round_up(double d, double keep_fraction = 0.1) const;

  bool operator==(const PipeCatalog&) const = default;
};

// Least-squares line through (diameter, cost); throws ValidationError when
// fewer than two points or non-increasing diameters.
void catalog_fit(PipeCatalog& catalog);

}  // namespace dhn
