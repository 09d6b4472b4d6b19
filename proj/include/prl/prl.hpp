#pragma once

#include "prl/assignment.hpp"
#include "prl/blocking.hpp"
#include "prl/comparison.hpp"
#include "prl/error.hpp"
#include "prl/estimators.hpp"
#include "prl/matching.hpp"
#include "prl/mcmc.hpp"
#include "prl/mixture.hpp"
#include "prl/records.hpp"
#include "prl/synth.hpp"
