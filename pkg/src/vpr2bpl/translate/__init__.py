"""Viper-to-Boogie translation: background theory, statement and assertion
encodings with well-definedness checks, and structured hint emission."""

from .background import FIELD_PREFIX, background_decls, btype_of, field_const
from .hints import (
    BindingHint, CursorHint, HintNode, MethodTranslation, TranslationRecord,
    TranslationResult, VariantHint, hints_from_json, hints_to_json,
)
from .emit import MUTATION_KINDS, translate_method, translate_program
