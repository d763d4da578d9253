// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "errors.hpp"
#include "random.hpp"
#include "manifold.hpp"
#include "codebook.hpp"
#include "special.hpp"
#include "analysis.hpp"
#include "channel.hpp"
#include "alignment.hpp"
#include "wind.hpp"
#include "table.hpp"
#include "linkbudget.hpp"
#include "config.hpp"
#include "experiment.hpp"
