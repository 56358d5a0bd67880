#pragma once

// Storage-independent auto-sequence allocation over a pluggable table
// contract, with a native-autoincrement reference model, workload replay
// and differential tracing, and backend-neutral table migration.

#include "autoseq/core.hpp"
#include "autoseq/error.hpp"
#include "autoseq/file_store.hpp"
#include "autoseq/memory_store.hpp"
#include "autoseq/migrate.hpp"
#include "autoseq/native.hpp"
#include "autoseq/row.hpp"
#include "autoseq/schema.hpp"
#include "autoseq/table.hpp"
#include "autoseq/value.hpp"
#include "autoseq/workload.hpp"
