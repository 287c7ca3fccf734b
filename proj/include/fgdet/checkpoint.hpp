#pragma once

// JSON persistence for trained detector parameters. The file stores the grid
// shape plus one flat array per parameter family, concatenated unit-major, so
// a load followed by a save reproduces the file byte for byte.

#include <string>

#include "fgdet/channel.hpp"
#include "fgdet/gap.hpp"

namespace fgdet {

inline constexpr int kCheckpointFormatVersion = 1;

std::string to_string(PreprocMode mode);
std::string to_string(BandPolicy policy);
PreprocMode preproc_mode_from_string(const std::string& s);
BandPolicy band_policy_from_string(const std::string& s);

struct Checkpoint {
    GapShape shape;
    int K = 0;  // symbols the weights were trained for (binding when untied)
    int L = 0;  // channel memory the parameter shapes assume
    GapParams params;
};

std::string checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fgdet
