/* Copyright 2026 The mlrpa Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Default noun wordlist for caption scanning.
//
// Hand-assembled list of common English nouns in singular form: the COCO and
// PASCAL VOC category words, everyday objects, people, places, animals,
// food, clothing, media and abstract nouns frequent in web alt-text. Lookup
// also tries simple plural stripping, so plurals need not be listed.
// Replace it at runtime with `scan --nouns <file>` (one word per line).

#pragma once

#include <array>
#include <string_view>

namespace mlrpa {

inline constexpr std::array kDefaultNouns = std::to_array<std::string_view>({
    // COCO / VOC categories
    "person", "bicycle", "car", "motorcycle", "motorbike", "airplane", "aeroplane", "bus", "train",
    "truck", "boat", "light", "hydrant", "sign", "meter", "bench", "bird", "cat", "dog", "horse",
    "sheep", "cow", "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella", "handbag", "tie",
    "suitcase", "frisbee", "ski", "snowboard", "ball", "kite", "bat", "glove", "skateboard",
    "surfboard", "racket", "bottle", "glass", "cup", "fork", "knife", "spoon", "bowl", "banana",
    "apple", "sandwich", "orange", "broccoli", "carrot", "hotdog", "pizza", "donut", "cake", "chair",
    "couch", "sofa", "plant", "bed", "table", "toilet", "tv", "tvmonitor", "monitor", "laptop",
    "mouse", "remote", "keyboard", "phone", "microwave", "oven", "toaster", "sink", "refrigerator",
    "fridge", "book", "clock", "vase", "scissors", "teddy", "drier", "toothbrush", "pottedplant",
    // people and roles
    "man", "woman", "child", "children", "kid", "baby", "boy", "girl", "people", "men", "women",
    "family", "friend", "mother", "father", "mom", "dad", "parent", "son", "daughter", "brother",
    "sister", "wife", "husband", "bride", "groom", "couple", "stranger", "neighbour", "neighbor",
    "student", "teacher", "doctor", "nurse", "soldier", "police", "officer", "worker", "artist",
    "player", "team", "fan", "crowd", "king", "queen", "prince", "princess", "president", "leader",
    "author", "actor", "actress", "singer", "band", "monk", "priest", "chef", "farmer", "driver",
    "pilot", "user", "customer", "guest", "member", "owner", "model", "hero", "creature", "monster",
    "human", "adult", "teen", "toddler", "infant", "grandma", "grandpa", "uncle", "aunt", "cousin",
    "myself", "yourself", "himself", "herself", "someone", "everyone", "anyone",
    // animals
    "animal", "pet", "puppy", "kitten", "fish", "tuna", "salmon", "shark", "whale", "dolphin",
    "lion", "tiger", "wolf", "fox", "deer", "rabbit", "bunny", "squirrel", "monkey", "pig", "goat",
    "chicken", "duck", "goose", "owl", "eagle", "parrot", "butterfly", "bee", "spider", "snake",
    "turtle", "frog", "dragon", "unicorn", "dinosaur", "insect", "pony", "camel", "panda", "koala",
    // places and structures
    "house", "home", "building", "room", "kitchen", "bathroom", "bedroom", "garden", "yard", "park",
    "street", "road", "city", "town", "village", "country", "world", "beach", "sea", "ocean",
    "lake", "river", "mountain", "hill", "forest", "tree", "field", "farm", "island", "desert",
    "sky", "sun", "moon", "star", "planet", "earth", "space", "church", "temple", "pagoda",
    "mansion", "castle", "palace", "tower", "bridge", "station", "airport", "hotel", "restaurant",
    "cafe", "bar", "shop", "store", "market", "mall", "office", "school", "university", "college",
    "hospital", "museum", "library", "stadium", "gym", "pool", "studio", "theater", "theatre",
    "wall", "floor", "door", "window", "roof", "stair", "staircase", "walkway", "terrace", "balcony",
    "spire", "statue", "structure", "complex", "interior", "exterior", "landscape", "view", "place",
    "location", "area", "region", "state", "nation", "map", "spot", "corner", "side", "front",
    "back", "top", "bottom", "center", "centre", "edge", "border", "path", "trail", "way",
    // objects
    "thing", "object", "item", "box", "bag", "basket", "jar", "pot", "pan", "plate", "dish",
    "mug", "tray", "lamp", "candle", "mirror", "picture", "photo", "photograph", "image", "painting",
    "poster", "frame", "canvas", "print", "card", "note", "letter", "paper", "envelope", "sticker",
    "label", "tag", "pen", "pencil", "brush", "tool", "hammer", "key", "lock", "chain", "rope",
    "wheel", "tire", "engine", "machine", "computer", "tablet", "iphone", "screen", "camera",
    "headphone", "speaker", "radio", "battery", "cable", "charger", "case", "cover", "sleeve",
    "watch", "ring", "necklace", "bracelet", "earring", "jewelry", "jewellery", "diamond", "gold",
    "silver", "coin", "money", "cash", "wallet", "purse", "ticket", "gift", "present", "toy",
    "doll", "game", "puzzle", "magnet", "mug", "pillow", "blanket", "towel", "curtain", "rug",
    "carpet", "desk", "shelf", "cabinet", "drawer", "closet", "furniture", "stool", "seat",
    "vehicle", "van", "jeep", "tractor", "ship", "yacht", "helicopter", "jet", "rocket", "bike",
    "scooter", "wagon", "cart", "grenade", "gun", "rifle", "weapon", "sword", "shield", "explosive",
    "flag", "banner", "balloon", "flower", "rose", "leaf", "grass", "rock", "stone", "sand", "wood",
    "metal", "plastic", "fabric", "leather", "cotton", "wool", "silk", "glass", "water", "fire",
    "ice", "snow", "rain", "wind", "cloud", "storm", "smoke", "air", "light", "shadow", "color",
    "colour", "pattern", "design", "logo", "icon", "symbol", "font", "text", "word", "quote",
    "sentence", "phrase", "line", "shape", "circle", "square", "heart", "cross", "arrow",
    // clothing
    "shirt", "tshirt", "tee", "dress", "skirt", "pants", "jeans", "shorts", "jacket", "coat",
    "hoodie", "sweater", "sweatshirt", "hat", "cap", "helmet", "shoe", "boot", "sneaker", "sandal",
    "sock", "scarf", "apron", "uniform", "costume", "suit", "gown", "belt", "mask", "glasses",
    "sunglasses", "outfit", "clothing", "clothes", "fashion", "top", "vest", "bikini", "swimsuit",
    // food and drink
    "food", "meal", "breakfast", "lunch", "dinner", "snack", "bread", "butter", "cream", "icing",
    "cheese", "egg", "meat", "beef", "pork", "steak", "burger", "fries", "salad", "soup", "rice",
    "pasta", "noodle", "cookie", "pie", "chocolate", "candy", "sugar", "salt", "fruit", "berry",
    "strawberry", "lemon", "grape", "tomato", "potato", "onion", "vegetable", "coffee", "tea",
    "juice", "milk", "wine", "beer", "drink", "cocktail", "dessert", "cupcake", "recipe",
    // body
    "body", "face", "head", "hair", "eye", "ear", "nose", "mouth", "lip", "tooth", "teeth", "hand",
    "finger", "arm", "leg", "foot", "feet", "skin", "tattoo", "beard", "smile",
    // media, web and commerce
    "video", "movie", "film", "show", "series", "episode", "song", "music", "album", "concert",
    "festival", "party", "wedding", "birthday", "holiday", "christmas", "halloween", "event",
    "news", "story", "article", "blog", "post", "page", "website", "site", "app", "profile",
    "account", "comment", "review", "recommendation", "topic", "content", "channel", "instagram",
    "facebook", "twitter", "youtube", "internet", "web", "online", "email", "link", "download",
    "product", "brand", "price", "sale", "discount", "order", "shipping", "delivery", "service",
    "company", "business", "industry", "market", "job", "career", "work", "project", "plan",
    "magazine", "newspaper", "journal", "novel", "chapter", "edition", "copyright", "license",
    "licence", "syndication", "redistribution", "metadata", "slide", "slideshow", "presentation",
    "introduction", "tutorial", "guide", "lesson", "course", "class", "exam", "test", "quiz",
    "screening", "measurement", "psychometrics", "error", "range", "power", "benefit", "medication",
    "medicine", "drug", "health", "disease", "cancer", "treatment", "therapy", "hospital",
    "template", "illustration", "vector", "drawing", "sketch", "cartoon", "clipart", "graphic",
    "wallpaper", "background", "texture", "stock", "collection", "set", "pack", "bundle", "kit",
    "fact", "facts", "thought", "idea", "opinion", "question", "answer", "problem", "solution",
    "reason", "result", "information", "data", "number", "item", "detail", "feature", "version",
    // time
    "time", "day", "night", "morning", "evening", "afternoon", "week", "month", "year", "season",
    "summer", "winter", "spring", "autumn", "fall", "today", "tomorrow", "yesterday", "moment",
    "hour", "minute", "date", "age", "century", "decade", "era", "history", "future", "past",
    // abstract
    "love", "life", "death", "peace", "war", "freedom", "truth", "faith", "hope", "dream", "fear",
    "joy", "happiness", "beauty", "art", "culture", "nature", "science", "technology", "sport",
    "football", "soccer", "basketball", "baseball", "tennis", "golf", "hockey", "race", "match",
    "championship", "cup", "goal", "win", "victory", "presence", "absence", "transfer", "change",
    "noise", "sound", "voice", "language", "name", "title", "brand", "style", "type", "kind",
    "size", "part", "piece", "half", "end", "start", "beginning", "step", "level", "rule", "law",
    "right", "power", "force", "energy", "money", "cost", "value", "quality", "experience",
    "incident", "attack", "accident", "crime", "police", "government", "politics", "election",
    "economy", "education", "school", "religion", "god", "spirit", "soul", "mind", "memory",
    "attention", "problem", "issue", "matter", "case", "example", "sample", "view", "vision",
    "mission", "adventure", "journey", "trip", "travel", "vacation", "tour", "visit", "sunrise",
    "sunset", "beam", "spire", "hti", "zedi", "chinthe", "lion", "dragon", "umbrella",
});

}  // namespace mlrpa
