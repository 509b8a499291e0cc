#include "support/synthetic_news.hpp"

#include <algorithm>

#include "ntc/rng.hpp"

namespace ntc::testing {

namespace {

const std::vector<std::string> kCategories = {"POLITICS", "SPORTS", "TECH", "TRAVEL"};

const std::vector<std::vector<std::string>> kKeywords = {
    {"senate", "election", "president", "congress", "vote", "policy", "democrats",
     "republicans", "campaign", "governor", "lawmakers", "bill", "legislation",
     "court", "justice", "immigration", "tax", "budget", "debate", "poll",
     "candidate", "administration", "federal", "senator", "impeachment", "ballot",
     "primary", "caucus", "veto", "lobbyist", "constitution", "diplomacy",
     "sanctions", "treaty", "parliament", "minister"},
    {"game", "team", "season", "coach", "playoff", "championship", "league",
     "player", "score", "win", "tournament", "football", "basketball", "baseball",
     "soccer", "olympics", "final", "trade", "draft", "quarterback", "goal",
     "match", "stadium", "fans", "injury", "roster", "referee", "medal", "race",
     "marathon", "tennis", "hockey", "golf", "pitcher", "homer", "touchdown"},
    {"app", "startup", "software", "data", "privacy", "internet", "smartphone",
     "device", "update", "launch", "users", "platform", "security", "robot",
     "chip", "cloud", "network", "gadget", "code", "algorithm", "browser",
     "laptop", "battery", "hack", "encryption", "server", "silicon", "interface",
     "download", "wireless", "processor", "digital", "automation", "streaming",
     "database", "website"},
    {"flight", "hotel", "beach", "trip", "vacation", "airline", "destination",
     "tour", "island", "airport", "passport", "cruise", "resort", "adventure",
     "guide", "mountain", "museum", "luggage", "itinerary", "tourist", "booking",
     "hostel", "backpacking", "sightseeing", "jetlag", "boarding", "visa",
     "souvenir", "landmark", "roadtrip", "campsite", "paradise", "getaway",
     "wanderlust", "excursion", "seaside"}};

const std::vector<std::string> kFiller = {
    "the",    "a",      "an",      "of",     "to",     "in",      "on",
    "for",    "with",   "and",     "or",     "but",    "as",      "at",
    "by",     "from",   "about",   "into",   "over",   "after",   "before",
    "between","out",    "against", "during", "without","under",   "around",
    "among",  "that",   "this",    "these",  "those",  "it",      "its",
    "they",   "their",  "them",    "we",     "our",    "you",     "your",
    "who",    "what",   "which",   "when",   "where",  "why",     "how",
    "all",    "each",   "every",   "some",   "any",    "few",     "more",
    "most",   "other",  "such",    "no",     "not",    "only",    "own",
    "same",   "so",     "than",    "too",    "very",   "just",    "now",
    "then",   "once",   "here",    "there",  "also",   "new",     "old",
    "good",   "great",  "big",     "small",  "long",   "short",   "high",
    "low",    "first",  "last",    "next",   "early",  "late",    "young",
    "people", "time",   "year",    "day",    "week",   "month",   "world",
    "city",   "state",  "country", "home",   "life",   "work",    "way",
    "part",   "place",  "case",    "point",  "number", "group",   "company",
    "story",  "report", "news",    "today",  "plan",   "change",  "move",
    "look",   "call",   "help",    "still",  "back",   "much",    "never"};

const std::vector<std::string> kLeads = {"breaking", "watch", "opinion", "exclusive",
                                         "revealed"};

const std::vector<std::string> kTails = {
    "read the full story here", "more details in the report",
    "experts weigh in on what comes next", "here is what you need to know"};

std::string pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.next_below(pool.size())];
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

const std::vector<std::string>& synthetic_categories() { return kCategories; }

std::vector<NewsRecord> make_synthetic_news(const SyntheticConfig& config) {
  Rng rng(config.seed);
  std::vector<NewsRecord> records;
  records.reserve(config.records_per_class * kCategories.size());

  for (std::size_t cls = 0; cls < kCategories.size(); ++cls) {
    for (std::size_t n = 0; n < config.records_per_class; ++n) {
      const std::size_t head_len = 5 + rng.next_below(5);   // 5..9
      const std::size_t desc_len = 10 + rng.next_below(11); // 10..20
      std::vector<std::string> tokens(head_len + desc_len);
      for (auto& t : tokens) t = pick(kFiller, rng);

      const double u = rng.uniform();
      std::size_t n_strong = 2;
      if (u < config.p_zero_strong) {
        n_strong = 0;
      } else if (u < config.p_zero_strong + config.p_one_strong) {
        n_strong = 1;
      }
      // two weak keywords: usually from the true class, sometimes misleading
      std::vector<std::size_t> slots(tokens.size());
      for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
      for (std::size_t i = slots.size() - 1; i > 0; --i) {
        std::swap(slots[i], slots[rng.next_below(i + 1)]);
      }
      std::size_t used = 0;
      for (std::size_t k = 0; k < n_strong; ++k) {
        tokens[slots[used++]] = pick(kKeywords[cls], rng);
      }
      for (std::size_t k = 0; k < 2; ++k) {
        std::size_t source = cls;
        if (rng.uniform() >= 0.65) {
          source = (cls + 1 + rng.next_below(kCategories.size() - 1)) %
                   kCategories.size();
        }
        tokens[slots[used++]] = pick(kKeywords[source], rng);
      }

      NewsRecord rec;
      std::vector<std::string> head(tokens.begin(), tokens.begin() + head_len);
      if (rng.uniform() < 0.3) head[0] = pick(kLeads, rng);
      std::vector<std::string> desc(tokens.begin() + head_len, tokens.end());
      rec.headline = join(head);
      rec.short_description = join(desc);
      if (rng.uniform() < 0.7) rec.short_description += " " + pick(kTails, rng);

      std::size_t label = cls;
      if (rng.uniform() < config.label_noise) {
        label = (cls + 1 + rng.next_below(kCategories.size() - 1)) % kCategories.size();
      }
      rec.category = kCategories[label];
      records.push_back(std::move(rec));
    }
  }
  return records;
}

void write_synthetic_news(const std::string& path, const SyntheticConfig& config) {
  write_news_lines(path, make_synthetic_news(config));
}

}  // namespace ntc::testing
