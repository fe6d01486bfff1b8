#pragma once

// Umbrella header.

#include "stsad/admm.hpp"
#include "stsad/baselines.hpp"
#include "stsad/config.hpp"
#include "stsad/evaluation.hpp"
#include "stsad/graph.hpp"
#include "stsad/ingest.hpp"
#include "stsad/io.hpp"
#include "stsad/linalg.hpp"
#include "stsad/logss.hpp"
#include "stsad/parallel.hpp"
#include "stsad/pipeline.hpp"
#include "stsad/scoring.hpp"
#include "stsad/synthetic.hpp"
#include "stsad/tensor.hpp"
