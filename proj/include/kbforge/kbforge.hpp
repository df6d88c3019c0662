#pragma once

#include "kbforge/atom.hpp"
#include "kbforge/errors.hpp"
#include "kbforge/expansion.hpp"
#include "kbforge/graphviz.hpp"
#include "kbforge/inference.hpp"
#include "kbforge/knowledge_base.hpp"
#include "kbforge/llm_backend.hpp"
#include "kbforge/ontology.hpp"
#include "kbforge/prolog_codec.hpp"
#include "kbforge/stats.hpp"
#include "kbforge/verify.hpp"
#include "kbforge/version.hpp"
