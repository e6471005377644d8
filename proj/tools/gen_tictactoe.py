#!/usr/bin/env python3
"""Write the tic-tac-toe endgame dataset as FIMI transactions.

Enumerates every board at the end of a game where x moves first (a win for
either side or a full board). Square s in 0..8 with value v in {x, o, b}
becomes item 3*s + v + 1; the item 28 flags "x wins".
"""
import sys

LINES = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8), (0, 4, 8), (2, 4, 6)]


def winner(board):
    for a, b, c in LINES:
        if board[a] != 'b' and board[a] == board[b] == board[c]:
            return board[a]
    return None


def endgames():
    seen = set()
    order = []

    def play(board, player):
        w = winner(board)
        if w or 'b' not in board:
            key = ''.join(board)
            if key not in seen:
                seen.add(key)
                order.append((key, w == 'x'))
            return
        for s in range(9):
            if board[s] == 'b':
                board[s] = player
                play(board, 'o' if player == 'x' else 'x')
                board[s] = 'b'

    play(['b'] * 9, 'x')
    return sorted(order)


def main():
    out = sys.stdout if len(sys.argv) < 2 else open(sys.argv[1], 'w')
    for key, x_wins in endgames():
        items = [3 * s + 'xob'.index(v) + 1 for s, v in enumerate(key)]
        if x_wins:
            items.append(28)
        out.write(' '.join(map(str, items)) + '\n')


if __name__ == '__main__':
    main()
