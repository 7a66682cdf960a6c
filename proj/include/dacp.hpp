#pragma once

// Umbrella header. The HTTP judge and scorer clients need cpp-httplib and
// live in "dacp/eval/http_client.hpp".

#include "dacp/anonymizer.hpp"
#include "dacp/augmenter.hpp"
#include "dacp/config.hpp"
#include "dacp/entropy.hpp"
#include "dacp/error.hpp"
#include "dacp/filter.hpp"
#include "dacp/hash.hpp"
#include "dacp/io.hpp"
#include "dacp/mixture.hpp"
#include "dacp/packing.hpp"
#include "dacp/pipeline.hpp"
#include "dacp/render.hpp"
#include "dacp/shards.hpp"
#include "dacp/stages.hpp"
#include "dacp/tokenizer.hpp"
#include "dacp/transcript.hpp"
#include "dacp/eval/external.hpp"
#include "dacp/eval/harness.hpp"
#include "dacp/eval/judge.hpp"
#include "dacp/eval/prompts.hpp"
#include "dacp/eval/rouge.hpp"
#include "dacp/synthetic.hpp"
