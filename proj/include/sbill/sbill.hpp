#pragma once

#include "sbill/billiard_map.hpp"
#include "sbill/errors.hpp"
#include "sbill/invariant_curves.hpp"
#include "sbill/perturbation.hpp"
#include "sbill/pipeline.hpp"
#include "sbill/point2.hpp"
#include "sbill/smooth_step.hpp"
#include "sbill/spectrum.hpp"
#include "sbill/svg.hpp"
#include "sbill/table_builder.hpp"
#include "sbill/trig_series.hpp"
#include "sbill/twist_example.hpp"
#include "sbill/vanishing_builder.hpp"
