#pragma once

#include "treebolic/fixtures.hpp"
