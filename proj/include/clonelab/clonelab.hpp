#pragma once

#include "clonelab/algebra.hpp"
#include "clonelab/betweenness.hpp"
#include "clonelab/budget.hpp"
#include "clonelab/clone.hpp"
#include "clonelab/errors.hpp"
#include "clonelab/expression.hpp"
#include "clonelab/formula.hpp"
#include "clonelab/hardness.hpp"
#include "clonelab/interpretation.hpp"
#include "clonelab/operation.hpp"
#include "clonelab/polymorphism.hpp"
#include "clonelab/ppdef.hpp"
#include "clonelab/projection_clone.hpp"
#include "clonelab/rational.hpp"
#include "clonelab/solver.hpp"
#include "clonelab/structure.hpp"
#include "clonelab/text.hpp"
#include "clonelab/tuple.hpp"
