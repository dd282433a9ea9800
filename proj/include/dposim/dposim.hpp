#pragma once

#include "dposim/commands.hpp"
#include "dposim/dde.hpp"
#include "dposim/error.hpp"
#include "dposim/format.hpp"
#include "dposim/freq_response.hpp"
#include "dposim/lambert_w.hpp"
#include "dposim/model.hpp"
#include "dposim/parallel.hpp"
#include "dposim/presets.hpp"
#include "dposim/scenario.hpp"
#include "dposim/spectrum.hpp"
#include "dposim/stability.hpp"
#include "dposim/textbook.hpp"
#include "dposim/verify.hpp"
