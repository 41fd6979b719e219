#pragma once

#include "freeshell/layout.hpp"

namespace freeshell::reference
{

/// All-pairs overlap count.
int overlap_pairs_serial(const Layout& layout);

}  // namespace freeshell::reference
