#pragma once

#include "bqproc/error.hpp"
#include "bqproc/numerics.hpp"
#include "bqproc/kernels.hpp"
#include "bqproc/csv.hpp"
#include "bqproc/dataset.hpp"
#include "bqproc/rng.hpp"
#include "bqproc/dgp.hpp"
#include "bqproc/score.hpp"
#include "bqproc/estimator.hpp"
#include "bqproc/choiceprob.hpp"
#include "bqproc/montecarlo.hpp"
