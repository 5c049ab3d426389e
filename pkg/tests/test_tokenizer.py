from hypothesis import given, strategies as st

from grammarinfer.tokenizer import TokenKind, tokenize

RUNS = {TokenKind.LOWER, TokenKind.UPPER, TokenKind.DIGIT, TokenKind.WHITESPACE}


@given(st.text(alphabet=st.characters(max_codepoint=0x7F)))
def test_tokens_reconstruct_input(text):
    assert "".join(t.text for t in tokenize(text)) == text


@given(st.text(alphabet="aZ9 \t+-()\"'xY"))
def test_runs_are_maximal(text):
    toks = [t for t in tokenize(text)]
    for a, b in zip(toks, toks[1:]):
        if a.kind in RUNS:
            assert a.kind is not b.kind
    for t in toks:
        if t.kind is TokenKind.PUNCT:
            assert len(t.text) == 1


def test_while_program():
    toks = tokenize("while n == (n+n) do L = n")
    assert len(toks) == 20
    assert [t.text for t in toks[:6]] == ["while", " ", "n", " ", "=", "="]


def test_string_literal_grouping():
    toks = tokenize('"k :-)"')
    assert [(t.text, t.kind) for t in toks] == [
        ('"', TokenKind.QUOTE),
        ("k :-)", TokenKind.STRING_CONTENT),
        ('"', TokenKind.QUOTE),
    ]


def test_empty_and_unterminated_quotes():
    assert [t.kind for t in tokenize("''")] == [TokenKind.QUOTE, TokenKind.QUOTE]
    toks = tokenize('ab "cd')
    assert toks[2].kind is TokenKind.PUNCT and toks[2].text == '"'
    assert toks[3].text == "cd"


def test_other_quote_inside_string_is_content():
    toks = tokenize("\"it's\" x")
    assert toks[1].text == "it's"
    assert toks[1].kind is TokenKind.STRING_CONTENT


def test_digits_and_case_split():
    assert [t.text for t in tokenize("abC12x")] == ["ab", "C", "12", "x"]
