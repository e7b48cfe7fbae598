// ce-lab: umbrella header.
// SPDX-License-Identifier: MIT
#ifndef CELAB_CELAB_HPP
#define CELAB_CELAB_HPP

#include "celab/cases.hpp"
#include "celab/dynamics_loss.hpp"
#include "celab/ei.hpp"
#include "celab/emergence.hpp"
#include "celab/errors.hpp"
#include "celab/io.hpp"
#include "celab/kdtree.hpp"
#include "celab/mi.hpp"
#include "celab/optimizer.hpp"
#include "celab/rng.hpp"
#include "celab/simulate.hpp"
#include "celab/spectral.hpp"
#include "celab/system.hpp"

#endif  // CELAB_CELAB_HPP
