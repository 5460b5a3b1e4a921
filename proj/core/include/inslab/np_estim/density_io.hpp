#pragma once

#include <string>

#include "inslab/np_estim/legendre.hpp"

namespace inslab {

/// `# support=lo,hi coeffs=l1;l2;...` then `grid_point,value` rows on the
/// density's grid.
void write_density_csv(const LegendreDensity& f, const std::string& path);
LegendreDensity read_density_csv(const std::string& path);

}  // namespace inslab
