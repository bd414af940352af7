#pragma once

#include "repairkit/asp_codegen.hpp"
#include "repairkit/asp_program.hpp"
#include "repairkit/causality.hpp"
#include "repairkit/error.hpp"
#include "repairkit/explanation.hpp"
#include "repairkit/hitting_set.hpp"
#include "repairkit/micro_asp.hpp"
#include "repairkit/rational.hpp"
#include "repairkit/relational.hpp"
#include "repairkit/repair.hpp"
#include "repairkit/secrecy.hpp"
#include "repairkit/spec.hpp"
#include "repairkit/spec_parser.hpp"
