#include <stdlib.h>

struct node {
    int value;
};

static struct node *make_node(int flag)
{
    struct node *n = NULL;
    if (flag > 0) {
        n = malloc(sizeof(struct node));
    }
    return n;
}

void CWE476_bad(int flag)
{
    struct node *n = make_node(flag);
    n->value = 5;
}
