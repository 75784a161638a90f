#pragma once

#include "qoct/config.hpp"
#include "qoct/errors.hpp"
#include "qoct/evolver.hpp"
#include "qoct/fft.hpp"
#include "qoct/grid.hpp"
#include "qoct/model.hpp"
#include "qoct/observables.hpp"
#include "qoct/pca.hpp"
#include "qoct/propagator.hpp"
#include "qoct/pulse.hpp"
#include "qoct/rng.hpp"
#include "qoct/state.hpp"
#include "qoct/sym3.hpp"
