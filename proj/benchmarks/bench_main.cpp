#include <benchmark/benchmark.h>

// the stock benchmark_main archive is not always usable (LTO bytecode tied
// to one compiler patchlevel), so the entry point lives here
BENCHMARK_MAIN();
