#pragma once

#include "gwat/catalog.hpp"
#include "gwat/config.hpp"
#include "gwat/error.hpp"
#include "gwat/exporter.hpp"
#include "gwat/lexicon.hpp"
#include "gwat/service.hpp"
#include "gwat/store.hpp"
#include "gwat/timestamp.hpp"
