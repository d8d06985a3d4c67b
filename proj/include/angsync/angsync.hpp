#pragma once

#include "angsync/baselines.hpp"
#include "angsync/core.hpp"
#include "angsync/eig.hpp"
#include "angsync/experiment.hpp"
#include "angsync/generators.hpp"
#include "angsync/instance_io.hpp"
#include "angsync/rng.hpp"
#include "angsync/spectra.hpp"
#include "angsync/sync_matrix.hpp"
#include "angsync/theory.hpp"
