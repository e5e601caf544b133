#pragma once

#include "tloc/dataset_io.hpp"
#include "tloc/embedding_grid.hpp"
#include "tloc/errors.hpp"
#include "tloc/harness.hpp"
#include "tloc/interval.hpp"
#include "tloc/llm_client.hpp"
#include "tloc/rtl_datagen.hpp"
#include "tloc/rtl_eval.hpp"
#include "tloc/slowfast_pool.hpp"
#include "tloc/task_format.hpp"
#include "tloc/text_grammar.hpp"
#include "tloc/time_codec.hpp"
