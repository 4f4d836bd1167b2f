#include <stdlib.h>

struct node {
    int value;
    struct node *next;
};

/* Count nodes. */
int length(struct node *head) {
    int n = 0;
    while (head) {
        n++;
        head = head->next;
    }
    return n;
}

int classify(int x) {
    switch (x) {
    case 0: return 0;
    case 1: return 1;
    default: return x < 0 || x > 9 ? -1 : 2;
    }
}
