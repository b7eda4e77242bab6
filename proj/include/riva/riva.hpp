// SPDX-License-Identifier: Apache-2.0
#pragma once

// Umbrella header: the whole library in one include.

#include "riva/actions.hpp"
#include "riva/backend.hpp"
#include "riva/env.hpp"
#include "riva/harness.hpp"
#include "riva/history.hpp"
#include "riva/orchestrator.hpp"
#include "riva/prompts.hpp"
#include "riva/scenario.hpp"
#include "riva/spec.hpp"
#include "riva/tool_call.hpp"
#include "riva/toolkit.hpp"
#include "riva/util.hpp"
