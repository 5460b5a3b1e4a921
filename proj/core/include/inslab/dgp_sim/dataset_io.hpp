#pragma once

#include <string>
#include <vector>

#include "inslab/dgp_sim/dgp.hpp"

namespace inslab {

// Directory layout:
//   insurees.csv  id,z,chi,j
//   claims.csv    id,claim_idx,damage   (claim_idx 1-based, damage %.6f)
//   truth.csv     id,theta,a            (written only when every record has truth)

void write_dataset(const std::vector<InsureeRecord>& records, const std::string& dir);

/// Throws ParseError naming file and line for malformed rows, negative
/// damages, unknown ids, or claim counts that disagree with j. truth.csv is
/// optional.
std::vector<InsureeRecord> read_dataset(const std::string& dir);

}  // namespace inslab
