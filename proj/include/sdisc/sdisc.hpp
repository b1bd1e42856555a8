#pragma once

#include "sdisc/core.hpp"
#include "sdisc/fnspace.hpp"
#include "sdisc/discretize.hpp"
#include "sdisc/matrixtools.hpp"
#include "sdisc/design.hpp"
#include "sdisc/recovery.hpp"
#include "sdisc/io.hpp"
#include "sdisc/harness.hpp"
