// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarcap/cli.hpp"

int main(int argc, char** argv) { return polarcap::cli::run(argc, argv); }
