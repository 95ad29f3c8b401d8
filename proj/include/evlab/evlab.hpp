#ifndef EVLAB_EVLAB_HPP
#define EVLAB_EVLAB_HPP

#include "evlab/config.hpp"
#include "evlab/dependence.hpp"
#include "evlab/engine.hpp"
#include "evlab/error.hpp"
#include "evlab/extremal.hpp"
#include "evlab/genpath.hpp"
#include "evlab/limitlaw.hpp"
#include "evlab/missing.hpp"
#include "evlab/normal.hpp"
#include "evlab/norming.hpp"
#include "evlab/quadrature.hpp"
#include "evlab/rng.hpp"

#endif  // EVLAB_EVLAB_HPP
