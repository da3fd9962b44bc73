#pragma once

#include "chern_extremal/calabi.hpp"
#include "chern_extremal/curvature.hpp"
#include "chern_extremal/errors.hpp"
#include "chern_extremal/extremal.hpp"
#include "chern_extremal/fft.hpp"
#include "chern_extremal/field_io.hpp"
#include "chern_extremal/gauduchon.hpp"
#include "chern_extremal/grid.hpp"
#include "chern_extremal/krylov.hpp"
#include "chern_extremal/metric.hpp"
#include "chern_extremal/operators.hpp"
#include "chern_extremal/report.hpp"
#include "chern_extremal/scenario.hpp"
