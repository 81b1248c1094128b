#pragma once

#include "a2bcd/async_runtime.hpp"
#include "a2bcd/block_partition.hpp"
#include "a2bcd/delay.hpp"
#include "a2bcd/dense_solvers.hpp"
#include "a2bcd/diagnostics.hpp"
#include "a2bcd/errors.hpp"
#include "a2bcd/history.hpp"
#include "a2bcd/libsvm.hpp"
#include "a2bcd/ode.hpp"
#include "a2bcd/oracle.hpp"
#include "a2bcd/params.hpp"
#include "a2bcd/problems/quadratic.hpp"
#include "a2bcd/problems/ridge_dual.hpp"
#include "a2bcd/problems/worst_case.hpp"
#include "a2bcd/rng.hpp"
#include "a2bcd/sampler.hpp"
#include "a2bcd/schedule.hpp"
#include "a2bcd/sparse_iteration.hpp"
#include "a2bcd/sparse_matrix.hpp"
#include "a2bcd/trace.hpp"
