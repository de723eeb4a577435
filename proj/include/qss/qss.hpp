#pragma once

#include "qss/adversary.hpp"
#include "qss/bell.hpp"
#include "qss/errors.hpp"
#include "qss/knowledge.hpp"
#include "qss/protocol.hpp"
#include "qss/qstate.hpp"
#include "qss/rng.hpp"
#include "qss/stats.hpp"
#include "qss/transcript.hpp"
#include "qss/verify.hpp"
