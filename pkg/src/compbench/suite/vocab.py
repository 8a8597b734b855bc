"""Default vocabulary for the rule-based prompt generators.

The shape list carries the 21 shape adjectives used by the fixed-template
generator. The texture table maps each of the 8 texture adjectives to the
nouns it may describe; texture template prompts only pair a texture with a
noun from its row.
"""

from __future__ import annotations

from .types import Vocabulary

COLORS = (
    "red", "yellow", "green", "blue", "black", "white", "brown", "pink",
    "purple", "orange", "gray", "golden", "silver", "beige", "turquoise",
    "teal", "crimson", "navy", "maroon", "violet", "cyan", "magenta",
    "tan", "olive", "ivory", "emerald", "scarlet", "indigo", "lavender",
    "amber",
)

SHAPES = (
    "long", "tall", "short", "big", "small", "cubic", "cylindrical",
    "pyramidal", "round", "circular", "oval", "oblong", "spherical",
    "triangular", "square", "rectangular", "conical", "pentagonal",
    "teardrop", "crescent", "diamond",
)

TEXTURES = {
    "rubber": ("band", "ball", "tire", "gloves", "sole shoes", "eraser", "boots", "mat"),
    "plastic": ("bottle", "bag", "toy", "cutlery", "chair", "phone case", "container", "cup", "plate"),
    "metallic": (
        "car", "jewelry", "watch", "keychain", "desk lamp", "door knob", "spoon",
        "fork", "knife", "key", "ring", "necklace", "bracelet", "earring",
    ),
    "wooden": (
        "chair", "table", "picture frame", "toy", "jewelry box", "door", "floor",
        "chopsticks", "pencils", "spoon", "knife",
    ),
    "fabric": (
        "bag", "pillow", "curtain", "shirt", "pants", "dress", "blanket", "towel",
        "rug", "hat", "scarf", "sweater", "jacket",
    ),
    "fluffy": ("pillow", "blanket", "teddy bear", "rug", "sweater", "clouds", "towel", "scarf", "hat"),
    "leather": ("jacket", "shoes", "belt", "bag", "wallet", "gloves", "chair", "sofa", "hat", "watch"),
    "glass": ("bottle", "vase", "window", "cup", "mirror", "jar", "table", "bowl", "plate"),
}

NON_SPATIAL_WORDS = (
    "watching", "holding", "wearing", "talking to", "playing with",
    "walking with", "standing on", "sitting on", "looking at", "speaking to",
    "hugging", "feeding", "riding", "chasing", "carrying", "pushing",
    "pulling", "lifting", "washing", "painting",
)

# General object nouns for the color/shape fixed-template prompts.
NOUNS = (
    "car", "bench", "flower", "vase", "chair", "table", "clock", "bag",
    "book", "bottle", "bowl", "box", "cup", "lamp", "mirror", "pillow",
    "plate", "shirt", "shoe", "umbrella", "balloon", "bird", "cat", "dog",
    "fish", "horse", "rabbit", "house", "door", "window", "fence", "kite",
    "ball", "hat", "scarf", "towel", "wallet", "watch", "phone", "computer",
    "keyboard", "guitar", "drum", "bicycle", "boat", "train", "bus", "truck",
    "airplane", "backpack", "candle", "carpet", "crown", "helmet", "jacket",
    "ladder", "mailbox", "pencil", "sofa", "spoon", "suitcase", "apple",
    "tree", "curtain", "bed",
)

PERSONS = (
    "man", "woman", "girl", "boy", "person", "child", "baby", "farmer",
    "doctor", "teacher",
)

ANIMALS = (
    "cat", "dog", "horse", "rabbit", "frog", "turtle", "giraffe", "bird",
    "cow", "sheep", "monkey", "elephant", "lion", "tiger", "bear", "duck",
    "chicken", "pig", "goat", "deer",
)

OBJECTS = (
    "table", "chair", "car", "bowl", "bag", "cup", "computer", "bed",
    "sofa", "lamp", "television", "bicycle", "motorcycle", "bench", "box",
    "suitcase", "umbrella", "guitar", "skateboard", "surfboard", "vase",
    "bottle", "book", "clock", "mirror",
)


def default_vocabulary() -> Vocabulary:
    vocab = Vocabulary(
        colors=COLORS,
        shapes=SHAPES,
        textures={k: tuple(v) for k, v in TEXTURES.items()},
        non_spatial_words=NON_SPATIAL_WORDS,
        nouns=NOUNS,
        persons=PERSONS,
        animals=ANIMALS,
        objects=OBJECTS,
    )
    vocab.validate()
    return vocab
