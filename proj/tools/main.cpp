// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/cli.hpp"

int main(int argc, char** argv) { return s2dgs::cli::run(argc, argv); }
