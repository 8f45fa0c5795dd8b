#pragma once

#include "ringdh/bus.hpp"
#include "ringdh/codec.hpp"
#include "ringdh/error.hpp"
#include "ringdh/modmath.hpp"
#include "ringdh/node.hpp"
#include "ringdh/outcome.hpp"
#include "ringdh/protocol.hpp"
#include "ringdh/recurrence.hpp"
#include "ringdh/winner.hpp"
