#pragma once

#include "kgrec/error.hpp"
#include "kgrec/feedback_log.hpp"
#include "kgrec/grounding.hpp"
#include "kgrec/kg_store.hpp"
#include "kgrec/ppr.hpp"
#include "kgrec/recommender.hpp"
#include "kgrec/rules.hpp"
#include "kgrec/service.hpp"
