"""Prompt text shipped with the extractor.

``SPECIES_DESCRIPTION_PROMPT`` steers a language model toward short,
appearance-focused sentences per species; ``CAPTION_SYSTEM_PROMPT`` /
``CAPTION_USER_PROMPT`` drive per-image captioning. ``TEMPLATES`` is the
fixed set of 20 camera-trap phrase templates rendered per class for the
template-based centroids; ``{}`` is replaced by the class name.
"""

SPECIES_DESCRIPTION_PROMPT = (
    "You are an AI assistant specialized in biology and providing accurate "
    "and detailed descriptions of animal species. We are creating detailed "
    "and specific prompts to describe various species. The goal is to "
    "generate multiple sentences that capture different aspects of each "
    "species' appearance and behavior. Please follow the structure and "
    "style shown in the examples below. Each species should have a set of "
    "descriptions that highlight key characteristics.\n\n"
    "Example Structure:\n\n"
    "Badger:\n"
    "- a badger is a mammal with a stout body and short sturdy legs.\n"
    "- a badger's fur is coarse and typically grayish-black.\n"
    "- badgers often feature a white stripe running from the nose to the "
    "back of the head dividing into two stripes along the sides of the "
    "body to the base of the tail.\n"
    "- badgers have broad flat heads with small eyes and ears.\n"
    "- badger noses are elongated and tapered ending in a black muzzle.\n"
    "- badgers possess strong well-developed claws adapted for digging "
    "burrows.\n"
    "- overall badgers have a rugged and muscular appearance suited for "
    "their burrowing lifestyle.\n"
)

CAPTION_SYSTEM_PROMPT = (
    "You are an AI assistant specialized in biology and providing accurate "
    "and detailed descriptions of animal species."
)

CAPTION_USER_PROMPT = (
    "You are given the description of an animal species. Provide a very "
    "detailed description of the appearance of the species and describe "
    "each body part of the animal in detail. Only include details that can "
    "be directly visible in a photograph of the animal. Only include "
    "information related to the appearance of the animal and nothing else. "
    "Make sure to only include information that is present in the species "
    "description and is certainly true for the given species. Do not "
    "include any information related to the sound or smell of the animal. "
    "Do not include any numerical information related to measurements in "
    "the text in units: m cm in inches ft feet km/h kg lb lbs. Remove any "
    "special characters such as unicode tags from the text. Return the "
    "answer as a single paragraph."
)

TEMPLATES = (
    "a photo captured by a camera trap of a {}.",
    "a camera trap photo of the {} captured in poor conditions.",
    "a cropped camera trap image of the {}.",
    "a camera trap image featuring a bright view of the {}.",
    "a camera trap image of the {} captured in clean conditions.",
    "a camera trap image of the {} captured in dirty conditions.",
    "a camera trap image with low light conditions featuring the {}.",
    "a black and white camera trap image of the {}.",
    "a cropped camera trap image of a {}.",
    "a blurry camera trap image of the {}.",
    "a camera trap image of the {}.",
    "a camera trap image of a single {}.",
    "a camera trap image of a {}.",
    "a camera trap image of a large {}.",
    "a blurry camera trap image of a {}.",
    "a pixelated camera trap image of a {}.",
    "a camera trap image of the weird {}.",
    "a camera trap image of the large {}.",
    "a dark camera trap image of a {}.",
    "a camera trap image of a small {}.",
)
