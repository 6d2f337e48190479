#pragma once

#include "cardmed/classifier.hpp"
#include "cardmed/descriptor.hpp"
#include "cardmed/errors.hpp"
#include "cardmed/fdsolve.hpp"
#include "cardmed/harness.hpp"
#include "cardmed/interval.hpp"
#include "cardmed/mediator.hpp"
#include "cardmed/model.hpp"
#include "cardmed/planner.hpp"
#include "cardmed/report.hpp"
#include "cardmed/schema.hpp"
