// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <clog/bihom.hpp>
#include <clog/bounds.hpp>
#include <clog/cli.hpp>
#include <clog/compact.hpp>
#include <clog/digit.hpp>
#include <clog/engine.hpp>
#include <clog/expr.hpp>
#include <clog/functions.hpp>
#include <clog/interval.hpp>
#include <clog/number.hpp>
#include <clog/series.hpp>
#include <clog/stream.hpp>
