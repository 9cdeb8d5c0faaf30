#pragma once

// Bundled English stopword list and lemma dictionary. Both are deliberately
// small and user-replaceable via PreprocessConfig file loaders; unknown
// surface forms lemmatize to themselves.

#include <string_view>

namespace tmr::english {

inline constexpr std::string_view kStopwords[] = {
    "a",       "about",   "above",  "after",   "again",   "against", "all",    "am",
    "an",      "and",     "any",    "are",     "as",      "at",      "be",     "because",
    "been",    "before",  "being",  "below",   "between", "both",    "but",    "by",
    "can",     "could",   "did",    "do",      "does",    "doing",   "down",   "during",
    "each",    "few",     "for",    "from",    "further", "had",     "has",    "have",
    "having",  "he",      "her",    "here",    "hers",    "herself", "him",    "himself",
    "his",     "how",     "i",      "if",      "in",      "into",    "is",     "it",
    "its",     "itself",  "just",   "me",      "more",    "most",    "my",     "myself",
    "no",      "nor",     "not",    "now",     "of",      "off",     "on",     "once",
    "only",    "or",      "other",  "our",     "ours",    "ourselves", "out",  "over",
    "own",     "same",    "she",    "should",  "so",      "some",    "such",   "than",
    "that",    "the",     "their",  "theirs",  "them",    "themselves", "then", "there",
    "these",   "they",    "this",   "those",   "through", "to",      "too",    "under",
    "until",   "up",      "very",   "was",     "we",      "were",    "what",   "when",
    "where",   "which",   "while",  "who",     "whom",    "why",     "will",   "with",
    "would",   "you",     "your",   "yours",   "yourself", "yourselves", "ain", "aren",
    "couldn",  "didn",    "doesn",  "hadn",    "hasn",    "haven",   "isn",    "ma",
    "mightn",  "mustn",   "needn",  "shan",    "shouldn", "wasn",    "weren",  "won",
    "wouldn",  "s",       "t",      "d",       "ll",      "m",       "o",      "re",
    "ve",      "y",
};

// surface -> lemma; irregular verbs, irregular plurals and common
// inflections seen in short-text health discourse.
inline constexpr std::pair<std::string_view, std::string_view> kLemmas[] = {
    {"am", "be"},           {"are", "be"},          {"is", "be"},
    {"was", "be"},          {"were", "be"},         {"been", "be"},
    {"being", "be"},        {"has", "have"},        {"had", "have"},
    {"having", "have"},     {"does", "do"},         {"did", "do"},
    {"done", "do"},         {"goes", "go"},         {"went", "go"},
    {"gone", "go"},         {"says", "say"},        {"said", "say"},
    {"makes", "make"},      {"made", "make"},       {"takes", "take"},
    {"took", "take"},       {"taken", "take"},      {"comes", "come"},
    {"came", "come"},       {"sees", "see"},        {"saw", "see"},
    {"seen", "see"},        {"knows", "know"},      {"knew", "know"},
    {"known", "know"},      {"gives", "give"},      {"gave", "give"},
    {"given", "give"},      {"finds", "find"},      {"found", "find"},
    {"thinks", "think"},    {"thought", "think"},   {"tells", "tell"},
    {"told", "tell"},       {"becomes", "become"},  {"became", "become"},
    {"shows", "show"},      {"showed", "show"},     {"shown", "show"},
    {"leaves", "leave"},    {"left", "leave"},      {"feels", "feel"},
    {"felt", "feel"},       {"puts", "put"},        {"brings", "bring"},
    {"brought", "bring"},   {"begins", "begin"},    {"began", "begin"},
    {"begun", "begin"},     {"keeps", "keep"},      {"kept", "keep"},
    {"holds", "hold"},      {"held", "hold"},       {"writes", "write"},
    {"wrote", "write"},     {"written", "write"},   {"stands", "stand"},
    {"stood", "stand"},     {"hears", "hear"},      {"heard", "hear"},
    {"lets", "let"},        {"means", "mean"},      {"meant", "mean"},
    {"sets", "set"},        {"meets", "meet"},      {"met", "meet"},
    {"runs", "run"},        {"ran", "run"},         {"pays", "pay"},
    {"paid", "pay"},        {"sits", "sit"},        {"sat", "sit"},
    {"speaks", "speak"},    {"spoke", "speak"},     {"spoken", "speak"},
    {"lies", "lie"},        {"lay", "lie"},         {"leads", "lead"},
    {"led", "lead"},        {"reads", "read"},      {"grows", "grow"},
    {"grew", "grow"},       {"grown", "grow"},      {"loses", "lose"},
    {"lost", "lose"},       {"falls", "fall"},      {"fell", "fall"},
    {"fallen", "fall"},     {"sends", "send"},      {"sent", "send"},
    {"builds", "build"},    {"built", "build"},     {"understands", "understand"},
    {"understood", "understand"},                   {"draws", "draw"},
    {"drew", "draw"},       {"drawn", "draw"},      {"breaks", "break"},
    {"broke", "break"},     {"broken", "break"},    {"spends", "spend"},
    {"spent", "spend"},     {"cuts", "cut"},        {"rises", "rise"},
    {"rose", "rise"},       {"risen", "rise"},      {"drives", "drive"},
    {"drove", "drive"},     {"driven", "drive"},    {"buys", "buy"},
    {"bought", "buy"},      {"wears", "wear"},      {"wore", "wear"},
    {"worn", "wear"},       {"chooses", "choose"},  {"chose", "choose"},
    {"chosen", "choose"},   {"dies", "die"},        {"died", "die"},
    {"children", "child"},  {"men", "man"},         {"women", "woman"},
    {"feet", "foot"},       {"teeth", "tooth"},     {"mice", "mouse"},
    {"geese", "goose"},     {"lives", "life"},      {"wives", "wife"},
    {"knives", "knife"},    {"leaves", "leaf"},     {"selves", "self"},
    {"data", "datum"},      {"criteria", "criterion"},
    {"vaccines", "vaccine"},{"vaccinations", "vaccination"},
    {"masks", "mask"},      {"deaths", "death"},    {"cases", "case"},
    {"kids", "kid"},        {"tests", "test"},      {"shots", "shot"},
    {"effects", "effect"},  {"variants", "variant"},{"boosters", "booster"},
    {"symptoms", "symptom"},{"rates", "rate"},      {"studies", "study"},
    {"numbers", "number"},  {"doctors", "doctor"},  {"schools", "school"},
    {"viruses", "virus"},   {"infections", "infection"},
    {"hospitals", "hospital"},                      {"doses", "dose"},
    {"weeks", "week"},      {"days", "day"},        {"years", "year"},
    {"months", "month"},    {"measures", "measure"},{"mandates", "mandate"},
    {"concerns", "concern"},{"risks", "risk"},      {"individuals", "individual"},
    {"statements", "statement"},                    {"results", "result"},
    {"companies", "company"},                       {"reports", "report"},
    {"replies", "reply"},   {"tweets", "tweet"},    {"posts", "post"},
    {"treatments", "treatment"},                    {"trials", "trial"},
    {"workers", "worker"},  {"jobs", "job"},        {"words", "word"},
    {"things", "thing"},    {"people", "people"},   {"persons", "person"},
};

}  // namespace tmr::english
