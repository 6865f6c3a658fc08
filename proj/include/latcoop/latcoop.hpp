#pragma once

#include "latcoop/error.hpp"
#include "latcoop/mathkit.hpp"
#include "latcoop/lattice_codec.hpp"
#include "latcoop/spacetime.hpp"
#include "latcoop/decoder.hpp"
#include "latcoop/channels.hpp"
#include "latcoop/trial.hpp"
#include "latcoop/relay_naf.hpp"
#include "latcoop/relay_ddf.hpp"
#include "latcoop/cma_naf.hpp"
#include "latcoop/analysis.hpp"
#include "latcoop/harness.hpp"
