#pragma once

#include "mcflab/commands.hpp"
#include "mcflab/contact_angle.hpp"
#include "mcflab/diagnostics.hpp"
#include "mcflab/errors.hpp"
#include "mcflab/fields.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/grid.hpp"
#include "mcflab/io.hpp"
#include "mcflab/metric.hpp"
#include "mcflab/operators.hpp"
#include "mcflab/oracle.hpp"
#include "mcflab/scenario.hpp"
#include "mcflab/translator.hpp"
