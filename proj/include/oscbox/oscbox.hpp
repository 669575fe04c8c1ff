#pragma once

// Umbrella header.

#include "oscbox/ball_basis.hpp"
#include "oscbox/functionals.hpp"
#include "oscbox/harness.hpp"
#include "oscbox/martingale.hpp"
#include "oscbox/measure_tree.hpp"
#include "oscbox/oracles.hpp"
#include "oscbox/random.hpp"
#include "oscbox/report.hpp"
#include "oscbox/singular.hpp"
#include "oscbox/wavelet.hpp"
