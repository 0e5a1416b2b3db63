#pragma once

#include <string>
#include <vector>

#include "lyrav/corpus.hpp"

namespace lyrav {

// Self-contained SVG documents; no external renderer needed.
std::string length_box_svg(const std::vector<long>& lengths);
std::string length_hist_svg(const std::vector<long>& lengths);
std::string authors_per_genre_svg(const std::vector<Song>& songs);

}  // namespace lyrav
