#pragma once

#include "ermodes/er_model.hpp"
#include "ermodes/pathfinder.hpp"
#include "ermodes/modegen.hpp"
#include "ermodes/clausespace.hpp"
