#pragma once

#include "asc/asc_model.hpp"
#include "asc/dictionary.hpp"
#include "asc/io/binary.hpp"
#include "asc/io/config.hpp"
#include "asc/io/dataset.hpp"
#include "asc/io/export.hpp"
#include "asc/metrics.hpp"
#include "asc/solvers/amp.hpp"
#include "asc/solvers/ista.hpp"
#include "asc/solvers/omp.hpp"
#include "asc/unfolded/network.hpp"
#include "asc/unfolded/train.hpp"
