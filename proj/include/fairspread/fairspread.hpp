#pragma once

// Umbrella header: fairness-aware influence maximization toolkit.

#include "fairspread/agent.hpp"
#include "fairspread/baselines.hpp"
#include "fairspread/diffusion.hpp"
#include "fairspread/embedding.hpp"
#include "fairspread/experiments.hpp"
#include "fairspread/graph.hpp"
#include "fairspread/hba.hpp"
#include "fairspread/parallel.hpp"
#include "fairspread/replay.hpp"
#include "fairspread/rng.hpp"
