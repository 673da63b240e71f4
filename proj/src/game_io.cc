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

#include "teamsym/game_io.h"

#include <fstream>
#include <sstream>
#include <vector>

#include "teamsym/errors.h"

namespace teamsym {

using nlohmann::json;

json GameToJson(const PayoffTensor& game) {
  const TeamStructure& s = game.structure();
  json doc;
  doc["m"] = s.num_teams();
  doc["team_sizes"] = s.team_sizes();
  doc["action_counts"] = s.action_counts();
  json entries = json::array();
  for (std::int64_t e = 0; e < game.num_entries(); ++e) {
    auto p = game.payoffs(e);
    entries.push_back({{"counts", game.JointCounts(e)},
                       {"payoffs", std::vector<double>(p.begin(), p.end())}});
  }
  doc["entries"] = std::move(entries);
  return doc;
}

PayoffTensor GameFromJson(const json& doc) {
  try {
    auto sizes = doc.at("team_sizes").get<std::vector<int>>();
    auto actions = doc.at("action_counts").get<std::vector<int>>();
    if (doc.contains("m") && doc.at("m").get<int>() != static_cast<int>(sizes.size())) {
      throw Error(ErrorCode::kInvalidInput, "m disagrees with team_sizes");
    }
    PayoffTensor game(TeamStructure(std::move(sizes), std::move(actions)));
    std::vector<bool> seen(game.num_entries(), false);
    for (const json& entry : doc.at("entries")) {
      auto counts = entry.at("counts").get<std::vector<CountVector>>();
      auto payoffs = entry.at("payoffs").get<std::vector<double>>();
      std::int64_t e = game.EntryIndex(counts);
      if (seen[e]) {
        throw Error(ErrorCode::kInvalidInput, "duplicate entry for counts " +
                                                  entry.at("counts").dump());
      }
      seen[e] = true;
      game.set_payoffs(e, payoffs);
    }
    for (std::int64_t e = 0; e < game.num_entries(); ++e) {
      if (!seen[e]) {
        throw Error(ErrorCode::kInvalidInput,
                    "missing entry for counts " + json(game.JointCounts(e)).dump());
      }
    }
    return game;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kInvalidInput, std::string("malformed game: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kInvalidStructure ||
        ex.code() == ErrorCode::kDimensionMismatch) {
      throw Error(ErrorCode::kInvalidInput, ex.what());
    }
    throw;
  }
}

std::string GameToString(const PayoffTensor& game) {
  return GameToJson(game).dump(2) + "\n";
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << contents;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

void SaveGame(const PayoffTensor& game, const std::string& path) {
  WriteFile(path, GameToString(game));
}

PayoffTensor GameFromString(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kInvalidInput, origin + ": " + ex.what());
  }
  return GameFromJson(doc);
}

PayoffTensor LoadGame(const std::string& path) {
  return GameFromString(ReadFile(path), path);
}

}  // namespace teamsym
