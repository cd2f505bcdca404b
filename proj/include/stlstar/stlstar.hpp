#pragma once

#include "stlstar/error.hpp"
#include "stlstar/formula.hpp"
#include "stlstar/parser.hpp"
#include "stlstar/rewrite.hpp"
#include "stlstar/signal.hpp"
#include "stlstar/monitor.hpp"
#include "stlstar/expression.hpp"
#include "stlstar/odesim.hpp"
#include "stlstar/sweep.hpp"
#include "stlstar/export.hpp"
