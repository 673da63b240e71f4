// Copyright 2026 The Teamsym Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEAMSYM_GAME_IO_H_
#define TEAMSYM_GAME_IO_H_

#include <string>

#include "json.hpp"
#include "teamsym/game.h"

namespace teamsym {

// {"m":2,"team_sizes":[2,2],"action_counts":[2,2],
//  "entries":[{"counts":[[0,2],[0,2]],"payoffs":[1.0,-1.0]}, ...]}
// Entries are written in canonical order.
nlohmann::json GameToJson(const PayoffTensor& game);

// Entries may appear in any order, but each feasible joint count tuple must
// appear exactly once. Violations throw kInvalidInput.
PayoffTensor GameFromJson(const nlohmann::json& doc);

std::string GameToString(const PayoffTensor& game);
void SaveGame(const PayoffTensor& game, const std::string& path);
PayoffTensor GameFromString(const std::string& text,
                            const std::string& origin = "<string>");
PayoffTensor LoadGame(const std::string& path);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, const std::string& contents);

}  // namespace teamsym

#endif  // TEAMSYM_GAME_IO_H_
