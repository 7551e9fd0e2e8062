// Copyright 2026 The idnv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "idnv/intent_parser.h"

#include <cctype>
#include <charconv>
#include <optional>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "idnv/status_macros.h"

namespace idnv {
namespace {

enum class TokKind { kWord, kLBrace, kRBrace, kComma, kEnd };

struct Token {
  TokKind kind;
  std::string text;
  int line;
  int col;
};

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
         c == '-' || c == '.' || c == '*' || c == '/';
}

absl::StatusOr<std::vector<Token>> Lex(absl::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '{' || c == '}' || c == ',') {
      TokKind kind = c == '{'   ? TokKind::kLBrace
                     : c == '}' ? TokKind::kRBrace
                                : TokKind::kComma;
      out.push_back({kind, std::string(1, c), line, col});
      advance(1);
      continue;
    }
    if (IsWordChar(c)) {
      size_t start = i;
      int start_col = col;
      while (i < src.size() && IsWordChar(src[i])) advance(1);
      out.push_back({TokKind::kWord, std::string(src.substr(start, i - start)),
                     line, start_col});
      continue;
    }
    return absl::InvalidArgumentError(
        absl::StrCat("syntax error at line ", line, ", column ", col,
                     ": unexpected character '", std::string(1, c), "'"));
  }
  out.push_back({TokKind::kEnd, "", line, col});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const LabelTaxonomy& tax)
      : toks_(std::move(tokens)), tax_(tax) {}

  absl::StatusOr<std::vector<NetworkIntent>> ParseFile() {
    std::vector<NetworkIntent> out;
    std::set<std::string> ids;
    while (Peek().kind != TokKind::kEnd) {
      const Token& start = Peek();
      ASSIGN_OR_RETURN(NetworkIntent intent, ParseIntent());
      if (!ids.insert(intent.id).second) {
        return Semantic(start, absl::StrCat("duplicate intent id '",
                                            intent.id, "'"));
      }
      out.push_back(std::move(intent));
    }
    return out;
  }

 private:
  const Token& Peek() const { return toks_[pos_]; }
  const Token& Next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

  bool PeekWord(absl::string_view w) const {
    return Peek().kind == TokKind::kWord && Peek().text == w;
  }

  absl::Status Syntax(const Token& at, absl::string_view expected) const {
    std::string got = at.kind == TokKind::kEnd ? "end of input"
                                               : absl::StrCat("'", at.text, "'");
    return absl::InvalidArgumentError(absl::StrCat(
        "syntax error at line ", at.line, ", column ", at.col, ": expected ",
        std::string(expected), ", got ", got));
  }

  absl::Status Semantic(const Token& at, absl::string_view msg) const {
    return absl::InvalidArgumentError(
        absl::StrCat("semantic error at line ", at.line, ", column ", at.col,
                     ": ", std::string(msg)));
  }

  absl::Status ExpectWord(absl::string_view w) {
    if (!PeekWord(w)) return Syntax(Peek(), absl::StrCat("'", w, "'"));
    Next();
    return absl::OkStatus();
  }

  absl::StatusOr<Token> ExpectAnyWord(absl::string_view what) {
    if (Peek().kind != TokKind::kWord) return Syntax(Peek(), what);
    return Next();
  }

  absl::StatusOr<EndpointGroupRef> ParseEpg() {
    ASSIGN_OR_RETURN(Token tok, ExpectAnyWord("endpoint group"));
    absl::StatusOr<EndpointGroupRef> ref = ParseEpgExpr(tok.text, tax_);
    if (!ref.ok()) return Semantic(tok, ref.status().message());
    return ref;
  }

  // Comma-separated list of words.
  absl::StatusOr<std::vector<Token>> ParseList(absl::string_view what) {
    std::vector<Token> items;
    ASSIGN_OR_RETURN(Token first, ExpectAnyWord(what));
    items.push_back(std::move(first));
    while (Peek().kind == TokKind::kComma) {
      Next();
      ASSIGN_OR_RETURN(Token item, ExpectAnyWord(what));
      items.push_back(std::move(item));
    }
    return items;
  }

  absl::StatusOr<NetworkIntent> ParseIntent() {
    NetworkIntent intent;
    RETURN_IF_ERROR(ExpectWord("intent"));
    ASSIGN_OR_RETURN(Token id, ExpectAnyWord("intent id"));
    for (char c : id.text) {
      if (c == '.' || c == '*' || c == '/') {
        return Semantic(id, absl::StrCat("invalid intent id '", id.text, "'"));
      }
    }
    intent.id = id.text;
    if (Peek().kind != TokKind::kLBrace) return Syntax(Peek(), "'{'");
    Next();
    RETURN_IF_ERROR(ExpectWord("from"));
    ASSIGN_OR_RETURN(intent.src, ParseEpg());
    RETURN_IF_ERROR(ExpectWord("to"));
    ASSIGN_OR_RETURN(intent.dst, ParseEpg());
    if (PeekWord("allow")) {
      intent.action = Action::kAllow;
    } else if (PeekWord("block")) {
      intent.action = Action::kBlock;
    } else {
      return Syntax(Peek(), "'allow' or 'block'");
    }
    const Token action_tok = Next();

    if (PeekWord("tcp") || PeekWord("udp")) {
      intent.classifier.proto = Next().text == "tcp" ? Proto::kTcp : Proto::kUdp;
    }
    if (PeekWord("port")) {
      Next();
      ASSIGN_OR_RETURN(std::vector<Token> ports, ParseList("port number"));
      for (const Token& p : ports) {
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(p.text.data(),
                                         p.text.data() + p.text.size(), value);
        if (ec == std::errc::result_out_of_range) {
          return Semantic(p, absl::StrCat("port out of range: ", p.text));
        }
        if (ec != std::errc() || ptr != p.text.data() + p.text.size()) {
          return Syntax(p, "port number");
        }
        if (value < 1 || value > 65535) {
          return Semantic(p, absl::StrCat("port out of range: ", p.text));
        }
        intent.classifier.ports.insert(static_cast<uint16_t>(value));
      }
    }
    if (PeekWord("via")) {
      const Token via = Next();
      ASSIGN_OR_RETURN(std::vector<Token> nfs, ParseList("network function"));
      if (intent.action == Action::kBlock) {
        return Semantic(via, "block intents cannot carry a chain");
      }
      for (const Token& nf : nfs) {
        std::optional<NfKind> kind = NfKind::FromName(nf.text);
        if (!kind.has_value()) {
          return Semantic(nf, absl::StrCat("unknown network function '",
                                           nf.text, "'"));
        }
        for (NfKind k : intent.chain) {
          if (k == *kind) {
            return Semantic(nf, absl::StrCat("duplicate network function '",
                                             nf.text, "'"));
          }
        }
        intent.chain.push_back(*kind);
      }
    }
    if (PeekWord("bw")) {
      const Token bw = Next();
      ASSIGN_OR_RETURN(Token value, ExpectAnyWord("bandwidth"));
      double mbps = 0;
      auto [ptr, ec] = std::from_chars(
          value.text.data(), value.text.data() + value.text.size(), mbps);
      if (ec != std::errc() || ptr != value.text.data() + value.text.size()) {
        return Syntax(value, "bandwidth in Mbps");
      }
      if (intent.action == Action::kBlock) {
        return Semantic(bw, "block intents cannot carry bandwidth");
      }
      if (!(mbps > 0)) return Semantic(value, "bandwidth must be positive");
      intent.bandwidth_mbps = mbps;
    }
    if (Peek().kind != TokKind::kRBrace) {
      return Syntax(Peek(), "'tcp', 'udp', 'port', 'via', 'bw' or '}'");
    }
    Next();
    if (absl::Status st = intent.Validate(); !st.ok()) {
      return Semantic(action_tok, st.message());
    }
    return intent;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  const LabelTaxonomy& tax_;
};

}  // namespace

absl::StatusOr<std::vector<NetworkIntent>> ParseIntentFile(
    absl::string_view source, const LabelTaxonomy& tax) {
  ASSIGN_OR_RETURN(std::vector<Token> tokens, Lex(source));
  Parser parser(std::move(tokens), tax);
  return parser.ParseFile();
}

std::string FormatNumber(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string RenderIntent(const NetworkIntent& intent) {
  std::string out = absl::StrCat("intent ", intent.id, " { from ",
                                 intent.src.ToString(), " to ",
                                 intent.dst.ToString(), " ",
                                 ActionName(intent.action));
  if (intent.classifier.proto != Proto::kAny) {
    absl::StrAppend(&out, " ", ProtoName(intent.classifier.proto));
  }
  if (!intent.classifier.ports.empty()) {
    absl::StrAppend(&out, " port ", absl::StrJoin(intent.classifier.ports, ","));
  }
  if (!intent.chain.empty()) {
    absl::StrAppend(&out, " via ", ChainToString(intent.chain));
  }
  if (intent.bandwidth_mbps.has_value()) {
    absl::StrAppend(&out, " bw ", FormatNumber(*intent.bandwidth_mbps));
  }
  out += " }";
  return out;
}

std::string RenderIntents(const std::vector<NetworkIntent>& intents) {
  std::string out;
  for (const NetworkIntent& i : intents) absl::StrAppend(&out, RenderIntent(i), "\n");
  return out;
}

}  // namespace idnv
