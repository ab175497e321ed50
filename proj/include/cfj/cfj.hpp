#pragma once

#include "cfj/ast.hpp"
#include "cfj/lookup.hpp"
#include "cfj/names.hpp"
#include "cfj/parser.hpp"
#include "cfj/relations.hpp"
#include "cfj/render.hpp"
#include "cfj/semantics.hpp"
#include "cfj/typing.hpp"
#include "cfj/harness.hpp"
#include "cfj/validate.hpp"
